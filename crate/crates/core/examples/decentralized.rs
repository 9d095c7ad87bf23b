//! Node-local PIAC: each bus compensates its own imbalance against the
//! flows fixed by the pre-disturbance setpoint.

use gridfreq::controllers::ControllerSpec;
use gridfreq::dynamics::{simulate, Disturbance, SimOptions};
use gridfreq::netmodel::load_case;
use gridfreq::powerflow::find_equilibrium;

const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee39.json");

fn main() -> gridfreq::Result<()> {
    let net = load_case(CASE)?.with_controllers_everywhere();
    let setpoint = find_equilibrium(&net, &ControllerSpec::piac(&net, 10.0)?)?;
    let ctrl = ControllerSpec::piac_decentralized(&net, 10.0, setpoint.theta)?;
    let dist = [Disturbance { t: 0.5, node: 12, dp: -0.2 }];
    let traj = simulate(&net, &ctrl, &dist, &SimOptions { t_max: 20.0, ..SimOptions::default() })?;

    let last = traj.len() - 1;
    let bus12 = net.require_index(12)?;
    let others: f64 = (0..net.n())
        .filter(|&i| i != bus12)
        .map(|i| traj.inputs[last][i].abs())
        .fold(0.0, f64::max);
    println!("after {:.0} s: u_12 = {:.6}, max |u_i| elsewhere = {:.2e}", traj.t[last], traj.inputs[last][bus12], others);
    println!("total input {:.6}, max |omega| {:.2e}", traj.total[last], traj.omega[last].iter().fold(0.0f64, |m, w| m.max(w.abs())));
    Ok(())
}
