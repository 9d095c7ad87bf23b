//! Sweeps the PIAC gain and the GB gain and checks the expected trends:
//! a larger PIAC gain gives a shallower nadir, larger GB gain a larger
//! overshoot.

use gridfreq::runner::{cmd_sweep, Scenario, SweepParameter};

const SCENARIOS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");

fn main() -> gridfreq::Result<()> {
    let sweeps = [
        ("piac_ieee39", SweepParameter::K, vec![2.0, 10.0, 50.0]),
        ("gb_ieee39", SweepParameter::KGb, vec![20.0, 60.0, 120.0]),
        ("piac_ieee39", SweepParameter::Dt, vec![1e-3, 5e-4]),
    ];
    for (name, param, values) in sweeps {
        let mut s = Scenario::load(format!("{SCENARIOS}/{name}.toml"))?;
        s.t_max = 20.0;
        let report = cmd_sweep(&s, param, &values)?;
        println!("{name}, {param:?}:");
        for row in &report.rows {
            println!(
                "  {:>8}: nadir {:.4} Hz, overshoot {:.3e} p.u.",
                row.value, row.metrics.nadir, row.metrics.max_overshoot_us
            );
        }
        if let (Some(trend), Some(ok)) = (&report.trend, report.trend_holds) {
            println!("  {trend}: {}", if ok { "holds" } else { "violated" });
        }
    }
    Ok(())
}
