use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridfreq::runner::{cmd_compare, cmd_simulate, cmd_sweep, validate_case, LawName, Scenario, SweepParameter};
use gridfreq::Result;

#[derive(Parser)]
#[command(name = "gridfreq", version, about = "Secondary frequency control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trajectory.csv and summary.json.
    Simulate(Overrides),
    /// Run several scenarios on the same case and tabulate their metrics.
    Compare(Overrides),
    /// Rerun a scenario over a list of parameter values.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// k, k_gb or dt.
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Load a case file and check its power flow.
    ValidateCase {
        #[arg(long)]
        case: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    /// Scenario file; repeat for compare.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    #[arg(long)]
    case: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    controller: Option<LawName>,
    #[arg(long)]
    k: Option<f64>,
}

impl Overrides {
    fn load(&self) -> Result<Vec<Scenario>> {
        self.scenario
            .iter()
            .map(|path| {
                let mut s = Scenario::load(path)?;
                if let Some(case) = &self.case {
                    s.case = case.clone();
                }
                if let Some(out) = &self.out {
                    s.out = out.clone();
                }
                if let Some(dt) = self.dt {
                    s.dt = dt;
                }
                if let Some(t) = self.tmax {
                    s.t_max = t;
                }
                if self.seed.is_some() {
                    s.seed = self.seed;
                }
                if let Some(law) = self.controller {
                    s.controller.law = law;
                }
                if self.k.is_some() {
                    s.controller.k = self.k;
                    s.controller.gains = None;
                }
                Ok(s)
            })
            .collect()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(o) => {
            for s in o.load()? {
                let r = cmd_simulate(&s)?;
                let m = &r.metrics;
                println!(
                    "{}: nadir {:.4} Hz, overshoot {:.3e} p.u., settling {} s -> {}",
                    s.name,
                    m.nadir,
                    m.max_overshoot_us,
                    fmt_opt(m.settling_time),
                    s.out.display()
                );
                if let Some(l) = &r.lyapunov {
                    println!(
                        "  energy descent: {} violations (alpha {:.4}, bound {:.4})",
                        l.violations, l.alpha, l.alpha_bound
                    );
                }
            }
        }
        Command::Compare(o) => {
            let rows = cmd_compare(&o.load()?)?;
            println!("{:<28} {:<20} {:>10} {:>12} {:>10} {:>12}", "scenario", "law", "nadir_hz", "overshoot", "settle_s", "mc_spread");
            for r in &rows {
                let m = &r.metrics;
                println!(
                    "{:<28} {:<20} {:>10.4} {:>12.3e} {:>10} {:>12.3e}{}",
                    r.scenario,
                    r.law.as_str(),
                    m.nadir,
                    m.max_overshoot_us,
                    fmt_opt(m.settling_time),
                    m.marginal_spread,
                    if r.overshoots { "  overshoots" } else { "" }
                );
            }
            if let Some(out) = &o.out {
                std::fs::create_dir_all(out).map_err(|e| gridfreq::Error::Io { path: out.clone(), source: e })?;
                let path = out.join("compare.json");
                let text = serde_json::to_string_pretty(&rows).expect("rows serialize");
                std::fs::write(&path, text + "\n").map_err(|e| gridfreq::Error::Io { path, source: e })?;
            }
        }
        Command::Sweep { overrides, param, values } => {
            for s in overrides.load()? {
                let report = cmd_sweep(&s, param, &values)?;
                println!("{:>12} {:>10} {:>12} {:>10}", "value", "nadir_hz", "overshoot", "settle_s");
                for r in &report.rows {
                    let m = &r.metrics;
                    println!(
                        "{:>12} {:>10.4} {:>12.3e} {:>10}",
                        r.value,
                        m.nadir,
                        m.max_overshoot_us,
                        fmt_opt(m.settling_time)
                    );
                }
                if let (Some(trend), Some(ok)) = (&report.trend, report.trend_holds) {
                    println!("trend ({trend}): {}", if ok { "holds" } else { "violated" });
                }
            }
        }
        Command::ValidateCase { case } => {
            let r = validate_case(&case)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
