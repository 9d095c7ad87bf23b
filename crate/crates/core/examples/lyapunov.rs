//! Energy function along the IEEE 39-bus PIAC trajectory, for the default
//! weight and for one below the descent bound.

use gridfreq::analysis::{check_lyapunov_descent, lyapunov_series, LyapunovConfig};
use gridfreq::controllers::ControllerSpec;
use gridfreq::dynamics::{simulate, Disturbance, SimOptions};
use gridfreq::netmodel::load_case;
use gridfreq::powerflow::find_equilibrium;

const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee39.json");

fn main() -> gridfreq::Result<()> {
    let net = load_case(CASE)?;
    let ctrl = ControllerSpec::piac(&net, 10.0)?;
    let dist: Vec<_> = [4, 12, 20].map(|node| Disturbance { t: 0.5, node, dp: -0.33 }).to_vec();
    let traj = simulate(&net, &ctrl, &dist, &SimOptions { t_max: 15.0, ..SimOptions::default() })?;

    let mut post = net.clone();
    for d in &dist {
        post = post.with_injection_change(post.require_index(d.node)?, d.dp);
    }
    let eq = find_equilibrium(&post, &ctrl)?;
    let cfg = LyapunovConfig::new(&post, &ctrl, &eq)?;

    let series = lyapunov_series(&cfg, &post, &ctrl, &traj)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "V", "V1", "V2", "V3");
    for n in (0..traj.len()).step_by(100) {
        let v = series[n];
        println!("{:>6.2} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}", traj.t[n], v.v, v.v1, v.v2, v.v3);
    }

    for cfg in [cfg.clone(), cfg.clone().with_alpha(0.25 * cfg.alpha_bound)] {
        let r = check_lyapunov_descent(&cfg, &post, &ctrl, &traj)?;
        println!(
            "alpha {:.4} (bound {:.4}{}): max dV/dt {:.3e}, {} violations above {:.3e}, {:.1}% of steps descending",
            r.alpha,
            r.alpha_bound,
            if r.below_bound { ", below bound" } else { "" },
            r.max_rate,
            r.violations,
            r.tolerance,
            100.0 * r.descending_fraction
        );
    }
    Ok(())
}
