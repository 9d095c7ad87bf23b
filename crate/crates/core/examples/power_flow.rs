//! Solves the post-disturbance equilibrium of the IEEE 39-bus case under
//! PIAC and checks it against the security region.

use gridfreq::controllers::ControllerSpec;
use gridfreq::netmodel::load_case;
use gridfreq::powerflow::{find_equilibrium, laplacian, security_check, synchronized_frequency};

const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee39.json");

fn main() -> gridfreq::Result<()> {
    let base = load_case(CASE)?;
    let mut net = base.clone();
    for id in [4, 12, 20] {
        net = net.with_injection_change(net.require_index(id)?, -0.33);
    }
    let ctrl = ControllerSpec::piac(&net, 10.0)?;
    let eq = find_equilibrium(&net, &ctrl)?;
    let p_s = net.aggregate_constants().imbalance;

    println!("P_s = {p_s:.4} p.u.");
    println!("lambda* = {:.6}, eta* = {:.6}", eq.controller.prices[0], eq.controller.internal[0]);
    println!("sum u* = {:.12}", eq.inputs().iter().sum::<f64>());
    println!("omega_syn(u*) = {:.3e}", synchronized_frequency(&net, eq.inputs()));
    println!("flow residual {:.2e} after {} Newton iterations", eq.flow.residual_norm, eq.flow.iterations);

    let sec = security_check(&net, &eq.theta);
    let widest = net
        .lines()
        .iter()
        .map(|l| (eq.theta[l.from] - eq.theta[l.to]).abs())
        .fold(0.0, f64::max);
    println!("secure: {} (widest line angle {widest:.4} rad)", sec.secure);

    let eig = laplacian(&net, &eq.theta).symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    println!("smallest reduced Laplacian eigenvalue {min:.4}");
    Ok(())
}
