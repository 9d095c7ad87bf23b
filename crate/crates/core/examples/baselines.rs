//! The integral baselines (AGC, Gather-Broadcast, DAI) next to PIAC on the
//! same disturbance, run concurrently.

use gridfreq::runner::{run_all, ControllerConfig, LawName, Scenario};

const SCENARIO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/piac_ieee39.toml");

fn main() -> gridfreq::Result<()> {
    let base = Scenario::load(SCENARIO)?;
    let scenarios: Vec<Scenario> = [LawName::Piac, LawName::Agc, LawName::Gb, LawName::Dai]
        .into_iter()
        .map(|law| {
            let mut s = base.clone();
            s.name = law.to_string();
            s.controller = ControllerConfig::new(law);
            s
        })
        .collect();
    println!("{:<6} {:>6} {:>10} {:>11} {:>9} {:>11} {:>11}", "law", "k", "nadir_hz", "overshoot", "settle_s", "mc_spread", "final_|w|");
    for r in run_all(&scenarios)? {
        let m = &r.metrics;
        println!(
            "{:<6} {:>6} {:>10.4} {:>11.3e} {:>9.2} {:>11.3e} {:>11.2e}",
            r.name,
            r.law.default_gain(),
            m.nadir,
            m.max_overshoot_us,
            m.settling_time.unwrap_or(f64::NAN),
            m.marginal_spread,
            m.final_max_omega
        );
    }
    Ok(())
}
