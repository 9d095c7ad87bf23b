//! PIAC against Gather-Broadcast on the IEEE 39-bus case after a 0.99 p.u.
//! load step. Writes both trajectories as CSV into the directory given as
//! the first argument (default `out/piac_vs_gb`).

use std::path::PathBuf;

use gridfreq::runner::{run, write_trajectory_csv, ControllerConfig, LawName, Scenario};

const SCENARIOS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("out/piac_vs_gb"), PathBuf::from);
    std::fs::create_dir_all(&out)?;
    let base = Scenario::load(format!("{SCENARIOS}/piac_ieee39.toml"))?;
    for (law, k) in [(LawName::Piac, 10.0), (LawName::Gb, 60.0)] {
        let mut s = base.clone();
        s.controller = ControllerConfig { k: Some(k), ..ControllerConfig::new(law) };
        s.t_max = 20.0;
        let r = run(&s)?;
        let m = &r.metrics;
        println!(
            "{law:<4} k = {k:>4}: nadir {:.3} Hz, u_s peak overshoot {:.4} p.u., settled after {:.2} s, final u_s {:.6}",
            m.nadir,
            m.max_overshoot_us,
            m.settling_time.unwrap_or(f64::NAN),
            m.final_total
        );
        let path = out.join(format!("{law}.csv"));
        write_trajectory_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &r.prepared, &r.trajectory, true)?;
    }
    println!("trajectories in {}", out.display());
    Ok(())
}
