//! Scenario files and the commands built on them: simulate, compare,
//! sweep and case validation.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{check_lyapunov_descent, compute_metrics, DescentReport, LyapunovConfig, Metrics, MetricsOptions};
use crate::controllers::{ControllerSpec, Law};
use crate::dynamics::{simulate, Disturbance, Integrator, SimOptions, Trajectory};
use crate::error::{Error, Result};
use crate::netmodel::{load_case, Network};
use crate::powerflow::{find_equilibrium, security_check, solve_algebraic, FlowOptions};

/// Environment variable capping the number of concurrent simulations.
pub const THREADS_ENV: &str = "GRIDFREQ_THREADS";

/// Overshoot above this many p.u. counts as overshooting in comparisons.
pub const OVERSHOOT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawName {
    Piac,
    PiacMulti,
    PiacDecentralized,
    Agc,
    Gb,
    Dai,
}

impl LawName {
    pub const ALL: [LawName; 6] = [
        LawName::Piac,
        LawName::PiacMulti,
        LawName::PiacDecentralized,
        LawName::Agc,
        LawName::Gb,
        LawName::Dai,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LawName::Piac => "piac",
            LawName::PiacMulti => "piac_multi",
            LawName::PiacDecentralized => "piac_decentralized",
            LawName::Agc => "agc",
            LawName::Gb => "gb",
            LawName::Dai => "dai",
        }
    }

    pub fn default_gain(self) -> f64 {
        match self {
            LawName::Piac | LawName::PiacMulti | LawName::PiacDecentralized => 10.0,
            LawName::Agc | LawName::Gb | LawName::Dai => 60.0,
        }
    }
}

impl fmt::Display for LawName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LawName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LawName::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown controller `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub law: LawName,
    /// Gain; defaults per law.
    #[serde(default)]
    pub k: Option<f64>,
    /// Per-area gains for `piac_multi`; defaults to `k` in every area.
    #[serde(default)]
    pub gains: Option<Vec<f64>>,
    /// Measured node id for `agc`; defaults to the first machine.
    #[serde(default)]
    pub node: Option<u32>,
    /// GB weights over machines and frequency-dependent nodes in
    /// canonical order; defaults to uniform.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Ring weight of the DAI communication graph.
    #[serde(default = "unit")]
    pub ring_weight: f64,
}

fn unit() -> f64 {
    1.0
}

impl ControllerConfig {
    pub fn new(law: LawName) -> Self {
        Self {
            law,
            k: None,
            gains: None,
            node: None,
            weights: None,
            ring_weight: 1.0,
        }
    }

    pub fn gain(&self) -> f64 {
        self.k.unwrap_or_else(|| self.law.default_gain())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceRecord {
    t: f64,
    node: u32,
    dp: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    case: PathBuf,
    out: Option<PathBuf>,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_max")]
    t_max: f64,
    #[serde(default = "default_stride")]
    stride: usize,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    integrator: IntegratorName,
    #[serde(default)]
    relative_frequencies: bool,
    #[serde(default = "default_settling")]
    settling_threshold: f64,
    controller: ControllerConfig,
    #[serde(default, rename = "disturbance")]
    disturbances: Vec<DisturbanceRecord>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t_max() -> f64 {
    60.0
}

fn default_stride() -> usize {
    10
}

fn default_settling() -> f64 {
    1e-4
}

/// A resolved scenario. Paths are absolute or relative to the working
/// directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub case: PathBuf,
    pub out: PathBuf,
    pub dt: f64,
    pub t_max: f64,
    pub stride: usize,
    /// When set, controller cost weights are redrawn uniformly on (0, 1).
    pub seed: Option<u64>,
    pub integrator: IntegratorName,
    pub relative_frequencies: bool,
    pub settling_threshold: f64,
    pub controller: ControllerConfig,
    pub disturbances: Vec<Disturbance>,
}

impl Scenario {
    /// Reads a scenario; `case` resolves against the file's directory and
    /// `out` against the working directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::from_toml_str(&text, base, stem, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, base: &Path, default_name: &str, what: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
            what: what.to_string(),
            context: e.to_string().trim_end().to_string(),
        })?;
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            what: what.to_string(),
            context: format!("field `{}`: {}", e.path(), e.inner().to_string().trim_end()),
        })?;
        let name = file.name.unwrap_or_else(|| default_name.to_string());
        let out = file.out.unwrap_or_else(|| PathBuf::from("out").join(&name));
        let scenario = Self {
            case: base.join(file.case),
            out,
            dt: file.dt,
            t_max: file.t_max,
            stride: file.stride,
            seed: file.seed,
            integrator: file.integrator,
            relative_frequencies: file.relative_frequencies,
            settling_threshold: file.settling_threshold,
            controller: file.controller,
            disturbances: file
                .disturbances
                .into_iter()
                .map(|d| Disturbance { t: d.t, node: d.node, dp: d.dp })
                .collect(),
            name,
        };
        scenario.check()?;
        Ok(scenario)
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Validation(format!("t_max must be nonnegative, got {}", self.t_max)));
        }
        if self.stride == 0 {
            return Err(Error::Validation("stride must be at least 1".into()));
        }
        if let Some(k) = self.controller.k {
            if !(k > 0.0) {
                return Err(Error::Validation(format!("gain k must be positive, got {k}")));
            }
        }
        for d in &self.disturbances {
            if !(d.t >= 0.0) {
                return Err(Error::Validation(format!("disturbance time {} is negative", d.t)));
            }
        }
        Ok(())
    }

    /// Loads the case and binds the controller.
    pub fn prepare(&self) -> Result<Prepared> {
        self.check()?;
        let mut net = load_case(&self.case)?;
        if let Some(seed) = self.seed {
            net = net.with_alphas(&random_alphas(seed, net.controller_nodes().len()))?;
        }
        for d in &self.disturbances {
            net.require_index(d.node)?;
        }
        let cfg = &self.controller;
        let k = cfg.gain();
        let ctrl = match cfg.law {
            LawName::Piac => ControllerSpec::piac(&net, k)?,
            LawName::PiacMulti => {
                let part = net
                    .partition()
                    .cloned()
                    .ok_or_else(|| Error::Validation("piac_multi needs areas in the case file".into()))?;
                let gains = cfg.gains.clone().unwrap_or_else(|| vec![k; part.len()]);
                ControllerSpec::piac_multi(&net, part, gains)?
            }
            LawName::PiacDecentralized => {
                net = net.with_controllers_everywhere();
                let setpoint = find_equilibrium(&net, &ControllerSpec::piac(&net, k)?)?;
                ControllerSpec::piac_decentralized(&net, k, setpoint.theta)?
            }
            LawName::Agc => {
                let node = match cfg.node {
                    Some(id) => net.require_index(id)?,
                    None => 0,
                };
                ControllerSpec::agc(&net, k, node)?
            }
            LawName::Gb => match &cfg.weights {
                Some(w) => ControllerSpec::gather_broadcast(&net, k, w.clone())?,
                None => ControllerSpec::gather_broadcast_uniform(&net, k)?,
            },
            LawName::Dai => ControllerSpec::dai_ring(&net, k, cfg.ring_weight)?,
        };
        Ok(Prepared {
            net,
            ctrl,
            disturbances: self.disturbances.clone(),
            sim: SimOptions {
                dt: self.dt,
                t_max: self.t_max,
                stride: self.stride,
                integrator: match self.integrator {
                    IntegratorName::Euler => Integrator::Euler,
                    IntegratorName::Rk4 => Integrator::Rk4,
                },
                flow: FlowOptions::default(),
            },
            metrics: MetricsOptions {
                settling_threshold: self.settling_threshold,
            },
        })
    }
}

/// Cost weights drawn uniformly on the open interval (0, 1).
pub fn random_alphas(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let a: f64 = rng.random();
            if a > 0.0 {
                break a;
            }
        })
        .collect()
}

/// A scenario bound to its network and controller.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub net: Network,
    pub ctrl: ControllerSpec,
    pub disturbances: Vec<Disturbance>,
    pub sim: SimOptions,
    pub metrics: MetricsOptions,
}

impl Prepared {
    /// The network with every disturbance applied.
    pub fn disturbed_network(&self) -> Result<Network> {
        let mut p = self.net.injections();
        for d in &self.disturbances {
            p[self.net.require_index(d.node)?] += d.dp;
        }
        Ok(self.net.with_injections(&p))
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub law: LawName,
    pub prepared: Prepared,
    pub trajectory: Trajectory,
    pub metrics: Metrics,
    /// Energy descent along the run, for centralized PIAC.
    pub lyapunov: Option<DescentReport>,
}

/// Simulates a scenario without writing artifacts.
pub fn run(scenario: &Scenario) -> Result<RunResult> {
    let prepared = scenario.prepare()?;
    let trajectory = simulate(&prepared.net, &prepared.ctrl, &prepared.disturbances, &prepared.sim)?;
    let metrics = compute_metrics(&trajectory, &prepared.net, &prepared.ctrl, &prepared.metrics);
    let lyapunov = if matches!(prepared.ctrl.law, Law::PiacSingle { .. }) {
        let post = prepared.disturbed_network()?;
        let eq = find_equilibrium(&post, &prepared.ctrl)?;
        let cfg = LyapunovConfig::new(&post, &prepared.ctrl, &eq)?;
        Some(check_lyapunov_descent(&cfg, &post, &prepared.ctrl, &trajectory)?)
    } else {
        None
    };
    Ok(RunResult {
        name: scenario.name.clone(),
        law: scenario.controller.law,
        prepared,
        trajectory,
        metrics,
        lyapunov,
    })
}

/// Column names of the trajectory CSV.
pub fn csv_header(prepared: &Prepared, traj: &Trajectory, relative: bool) -> Vec<String> {
    let net = &prepared.net;
    let ctrl = &prepared.ctrl;
    let mut cols = vec!["t".to_string()];
    for i in 0..net.n_dynamic() {
        cols.push(format!("f_{}", net.node(i).id));
    }
    cols.push("u_s".into());
    cols.extend(price_labels(prepared));
    for &i in &ctrl.nodes {
        cols.push(format!("u_{}", net.node(i).id));
    }
    for &i in &ctrl.nodes {
        cols.push(format!("mc_{}", net.node(i).id));
    }
    cols.push("omega_s".into());
    if let Some(part) = export_areas(prepared, traj) {
        for name in part {
            cols.push(format!("pex_{name}"));
        }
    }
    if relative {
        for i in 0..net.n_dynamic() {
            cols.push(format!("rel_{}", net.node(i).id));
        }
    }
    cols
}

fn price_labels(prepared: &Prepared) -> Vec<String> {
    let net = &prepared.net;
    let ctrl = &prepared.ctrl;
    match &ctrl.law {
        Law::PiacSingle { .. } | Law::Agc { .. } | Law::GatherBroadcast { .. } => vec!["lambda".into()],
        Law::PiacMulti { partition, .. } => partition
            .areas()
            .iter()
            .map(|a| format!("lambda_{}", a.name))
            .collect(),
        Law::Dai { .. } => ctrl
            .nodes
            .iter()
            .map(|&i| format!("lambda_{}", net.node(i).id))
            .collect(),
        Law::PiacDecentralized { .. } => Vec::new(),
    }
}

fn export_areas(prepared: &Prepared, traj: &Trajectory) -> Option<Vec<String>> {
    if traj.nominal_exports.is_empty() {
        return None;
    }
    let part = match &prepared.ctrl.law {
        Law::PiacMulti { partition, .. } => partition,
        _ => prepared.net.partition()?,
    };
    Some(part.areas().iter().map(|a| a.name.clone()).collect())
}

/// Writes the trajectory as CSV. Floats use Rust's shortest round-trip
/// formatting, which is locale independent.
pub fn write_trajectory_csv(mut w: impl Write, prepared: &Prepared, traj: &Trajectory, relative: bool) -> io::Result<()> {
    let net = &prepared.net;
    let f0 = net.base_frequency();
    writeln!(w, "{}", csv_header(prepared, traj, relative).join(","))?;
    let mut row: Vec<String> = Vec::new();
    for n in 0..traj.len() {
        row.clear();
        row.push(traj.t[n].to_string());
        for i in 0..net.n_dynamic() {
            row.push((f0 + traj.omega[n][i] * f0).to_string());
        }
        row.push(traj.total[n].to_string());
        row.extend(traj.prices[n].iter().map(f64::to_string));
        row.extend(prepared.ctrl.nodes.iter().map(|&i| traj.inputs[n][i].to_string()));
        row.extend(traj.marginal_costs[n].iter().map(f64::to_string));
        row.push(traj.abstract_frequency[n].to_string());
        row.extend(traj.exports[n].iter().map(f64::to_string));
        if relative {
            let ws = traj.abstract_frequency[n];
            row.extend((0..net.n_dynamic()).map(|i| (traj.omega[n][i] - ws).to_string()));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub scenario: &'a str,
    pub law: LawName,
    pub case: String,
    pub dt: f64,
    pub t_max: f64,
    pub stride: usize,
    pub seed: Option<u64>,
    pub samples: usize,
    pub cost_weights: Vec<f64>,
    pub metrics: &'a Metrics,
    pub lyapunov: Option<&'a DescentReport>,
}

fn summary<'a>(scenario: &'a Scenario, result: &'a RunResult) -> Summary<'a> {
    Summary {
        scenario: &scenario.name,
        law: result.law,
        case: scenario.case.display().to_string(),
        dt: scenario.dt,
        t_max: scenario.t_max,
        stride: scenario.stride,
        seed: scenario.seed,
        samples: result.trajectory.len(),
        cost_weights: result.prepared.ctrl.costs.iter().map(|c| c.alpha()).collect(),
        metrics: &result.metrics,
        lyapunov: result.lyapunov.as_ref(),
    }
}

fn create_file(path: &Path) -> Result<io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Runs a scenario and writes `trajectory.csv` and `summary.json` into its
/// output directory.
pub fn cmd_simulate(scenario: &Scenario) -> Result<RunResult> {
    let result = run(scenario)?;
    fs::create_dir_all(&scenario.out).map_err(|e| Error::io(&scenario.out, e))?;
    let csv_path = scenario.out.join("trajectory.csv");
    let mut csv = create_file(&csv_path)?;
    write_trajectory_csv(&mut csv, &result.prepared, &result.trajectory, scenario.relative_frequencies)
        .and_then(|_| csv.flush())
        .map_err(|e| Error::io(&csv_path, e))?;
    let json_path = scenario.out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary(scenario, &result)).expect("summary serializes");
    fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok(result)
}

/// Thread pool sized by [`THREADS_ENV`] when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Validation(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))
}

/// Runs independent scenarios concurrently; results keep input order.
pub fn run_all(scenarios: &[Scenario]) -> Result<Vec<RunResult>> {
    let pool = thread_pool()?;
    pool.install(|| scenarios.par_iter().map(run).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub scenario: String,
    pub law: LawName,
    pub metrics: Metrics,
    pub overshoots: bool,
}

/// Runs scenarios that share a case and disturbances and tabulates
/// their metrics.
pub fn cmd_compare(scenarios: &[Scenario]) -> Result<Vec<CompareRow>> {
    let Some(first) = scenarios.first() else {
        return Err(Error::Validation("compare needs at least one scenario".into()));
    };
    for s in &scenarios[1..] {
        if !same_path(&s.case, &first.case) || s.seed != first.seed {
            return Err(Error::Mismatch(format!(
                "`{}` uses case {} (seed {:?}) but `{}` uses {} (seed {:?})",
                s.name,
                s.case.display(),
                s.seed,
                first.name,
                first.case.display(),
                first.seed
            )));
        }
        if s.disturbances != first.disturbances {
            return Err(Error::Mismatch(format!(
                "`{}` and `{}` have different disturbances",
                s.name, first.name
            )));
        }
    }
    Ok(run_all(scenarios)?
        .into_iter()
        .map(|r| CompareRow {
            overshoots: r.metrics.max_overshoot_us > OVERSHOOT_TOLERANCE,
            scenario: r.name,
            law: r.law,
            metrics: r.metrics,
        })
        .collect())
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    K,
    KGb,
    Dt,
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(SweepParameter::K),
            "k_gb" => Ok(SweepParameter::KGb),
            "dt" => Ok(SweepParameter::Dt),
            _ => Err(Error::InvalidParameter(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    /// Description of the expected trend, if one applies.
    pub trend: Option<String>,
    pub trend_holds: Option<bool>,
}

/// Reruns `scenario` once per value of `parameter`.
pub fn cmd_sweep(scenario: &Scenario, parameter: SweepParameter, values: &[f64]) -> Result<SweepReport> {
    if parameter == SweepParameter::KGb && scenario.controller.law != LawName::Gb {
        return Err(Error::Validation("k_gb sweeps need a gb scenario".into()));
    }
    let variants: Vec<Scenario> = values
        .iter()
        .map(|&v| {
            let mut s = scenario.clone();
            match parameter {
                SweepParameter::K | SweepParameter::KGb => {
                    s.controller.k = Some(v);
                    s.controller.gains = None;
                }
                SweepParameter::Dt => {
                    s.stride = ((scenario.stride as f64 * scenario.dt / v).round() as usize).max(1);
                    s.dt = v;
                }
            }
            s.name = format!("{}[{}={v}]", scenario.name, parameter_name(parameter));
            s
        })
        .collect();
    let results = run_all(&variants)?;
    let base_frequency = results.first().map_or(1.0, |r| r.prepared.net.base_frequency());
    let rows: Vec<SweepRow> = results
        .into_iter()
        .zip(values)
        .map(|(r, &value)| SweepRow { value, metrics: r.metrics })
        .collect();
    let (trend, trend_holds) = sweep_trend(scenario.controller.law, parameter, &rows, base_frequency);
    Ok(SweepReport {
        parameter,
        rows,
        trend,
        trend_holds,
    })
}

fn parameter_name(p: SweepParameter) -> &'static str {
    match p {
        SweepParameter::K => "k",
        SweepParameter::KGb => "k_gb",
        SweepParameter::Dt => "dt",
    }
}

fn sweep_trend(
    law: LawName,
    parameter: SweepParameter,
    rows: &[SweepRow],
    base_frequency: f64,
) -> (Option<String>, Option<bool>) {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let pairs = || sorted.windows(2).map(|w| (&w[0].metrics, &w[1].metrics));
    match (law, parameter) {
        (LawName::Piac, SweepParameter::K) => (
            Some("nadir depth strictly decreasing in k".into()),
            Some(pairs().all(|(a, b)| b.nadir > a.nadir)),
        ),
        (LawName::Gb, SweepParameter::K | SweepParameter::KGb) => (
            Some("overshoot nondecreasing in k_gb".into()),
            Some(pairs().all(|(a, b)| b.max_overshoot_us >= a.max_overshoot_us)),
        ),
        (_, SweepParameter::Dt) => (
            Some("nadir and overshoot agree within 1e-3 p.u. across dt".into()),
            Some(pairs().all(|(a, b)| {
                (a.nadir - b.nadir).abs() / base_frequency <= 1e-3
                    && (a.max_overshoot_us - b.max_overshoot_us).abs() <= 1e-3
            })),
        ),
        _ => (None, None),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub nodes: usize,
    pub machines: usize,
    pub frequency_dependent: usize,
    pub passive: usize,
    pub lines: usize,
    pub controllers: usize,
    pub areas: usize,
    pub imbalance: f64,
    pub flow_residual: f64,
    pub flow_iterations: usize,
    pub secure: bool,
    pub max_angle_difference: f64,
}

/// Loads a case and solves its uncontrolled flow with the reference pinned.
pub fn validate_case(path: impl AsRef<Path>) -> Result<CaseReport> {
    let net = load_case(path)?;
    let agg = net.aggregate_constants();
    let mut p = net.injections();
    let r = net.reference();
    p[r] -= agg.imbalance;
    let unknown: Vec<usize> = (0..net.n()).filter(|&i| i != r).collect();
    let flow = solve_algebraic(&net, &p, &vec![0.0; net.n()], &unknown, &FlowOptions::default())?;
    let max_angle_difference = net
        .lines()
        .iter()
        .map(|l| (flow.theta[l.from] - flow.theta[l.to]).abs())
        .fold(0.0, f64::max);
    Ok(CaseReport {
        nodes: net.n(),
        machines: net.n_machine(),
        frequency_dependent: net.n_freq(),
        passive: net.n_passive(),
        lines: net.lines().len(),
        controllers: net.controller_nodes().len(),
        areas: net.partition().map_or(1, |p| p.len()),
        imbalance: agg.imbalance,
        flow_residual: flow.residual_norm,
        flow_iterations: flow.iterations,
        secure: security_check(&net, &flow.theta).secure,
        max_angle_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ieee39.json");

    fn scenario(body: &str) -> Result<Scenario> {
        let text = format!("case = \"{CASE}\"\n{body}");
        Scenario::from_toml_str(&text, Path::new(""), "test", "test.toml")
    }

    #[test]
    fn parses_full_scenario() {
        let s = scenario(
            "dt = 2e-3\nt_max = 5.0\nseed = 3\n[controller]\nlaw = \"gb\"\nk = 20.0\n\
             [[disturbance]]\nt = 0.5\nnode = 4\ndp = -0.33\n",
        )
        .unwrap();
        assert_eq!(s.controller.law, LawName::Gb);
        assert_eq!(s.controller.gain(), 20.0);
        assert_eq!(s.disturbances, vec![Disturbance { t: 0.5, node: 4, dp: -0.33 }]);
        assert_eq!(s.stride, 10);
        assert_eq!(s.out, PathBuf::from("out/test"));
        let p = s.prepare().unwrap();
        assert_eq!(p.ctrl.costs.len(), 10);
    }

    #[test]
    fn unknown_field_is_reported_with_path() {
        let err = scenario("[controller]\nlaw = \"piac\"\ngain = 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("controller") && msg.contains("gain"), "{msg}");
    }

    #[test]
    fn unknown_law_and_node_are_rejected() {
        assert!(scenario("[controller]\nlaw = \"pid\"\n").is_err());
        let s = scenario("[controller]\nlaw = \"piac\"\n[[disturbance]]\nt = 0.5\nnode = 99\ndp = 0.1\n").unwrap();
        assert!(matches!(s.prepare(), Err(Error::UnknownNode(99))));
    }

    #[test]
    fn seeded_alphas_are_reproducible_and_open() {
        let a = random_alphas(11, 50);
        assert_eq!(a, random_alphas(11, 50));
        assert_ne!(a, random_alphas(12, 50));
        assert!(a.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn sweep_parameter_names() {
        assert_eq!("k".parse::<SweepParameter>().unwrap(), SweepParameter::K);
        assert_eq!("k_GB".parse::<SweepParameter>().unwrap(), SweepParameter::KGb);
        assert!(matches!("gain".parse::<SweepParameter>(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn csv_header_is_stable() {
        let s = scenario("t_max = 0.01\nrelative_frequencies = true\n[controller]\nlaw = \"piac_multi\"\n").unwrap();
        let r = run(&s).unwrap();
        let header = csv_header(&r.prepared, &r.trajectory, true);
        assert_eq!(header[0], "t");
        assert_eq!(header[1], "f_30");
        assert_eq!(header[40], "u_s");
        assert_eq!(&header[41..43], ["lambda_A1", "lambda_A2"]);
        assert_eq!(header[43], "u_30");
        assert_eq!(header[53], "mc_30");
        assert_eq!(header[63], "omega_s");
        assert_eq!(&header[64..66], ["pex_A1", "pex_A2"]);
        assert_eq!(header[66], "rel_30");
        assert_eq!(header.len(), 66 + 39);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &r.prepared, &r.trajectory, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), header.len());
        }
    }

    #[test]
    fn validates_shipped_case() {
        let report = validate_case(CASE).unwrap();
        assert_eq!((report.nodes, report.machines, report.passive), (39, 10, 0));
        assert!(report.secure);
        assert!(report.imbalance.abs() < 1e-9);
    }
}
