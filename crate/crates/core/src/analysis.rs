//! Energy-function diagnostics and scalar performance metrics.

use serde::Serialize;

use crate::controllers::{ControllerSpec, Law};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::netmodel::Network;
use crate::powerflow::Equilibrium;

/// U(φ) = Σ_lines B_ij (1 − cos(φ_i − φ_j)).
pub fn potential_u(net: &Network, phi: &[f64]) -> f64 {
    net.lines()
        .iter()
        .map(|l| l.susceptance * (1.0 - (phi[l.from] - phi[l.to]).cos()))
        .sum()
}

/// ∇U(φ); component i is the outflow at node i.
pub fn potential_gradient(net: &Network, phi: &[f64]) -> Vec<f64> {
    net.outflows(phi)
}

/// Equilibrium and weight defining the energy function of a centralized
/// PIAC closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovConfig {
    pub k: f64,
    /// Weight of the price term.
    pub alpha: f64,
    pub theta_eq: Vec<f64>,
    pub integral_eq: f64,
    /// Σ J'⁻¹(λ*) = u_s*.
    pub total_eq: f64,
    gradient_eq: Vec<f64>,
    potential_eq: f64,
    /// 1/(k·min D) over the controller nodes.
    pub alpha_bound: f64,
}

impl LyapunovConfig {
    /// Config with the default weight 2/(k·min D).
    pub fn new(net: &Network, ctrl: &ControllerSpec, eq: &Equilibrium) -> Result<Self> {
        let k = match ctrl.law {
            Law::PiacSingle { k } => k,
            _ => {
                return Err(Error::Validation(
                    "the energy function is defined for centralized PIAC only".into(),
                ))
            }
        };
        let min_droop = ctrl.min_controller_droop(net);
        if !(min_droop > 0.0) {
            return Err(Error::Validation("energy weight needs positive droop at every controller".into()));
        }
        let alpha_bound = 1.0 / (k * min_droop);
        Ok(Self {
            k,
            alpha: 2.0 * alpha_bound,
            theta_eq: eq.theta.clone(),
            integral_eq: eq.controller.internal[0],
            total_eq: eq.controller.total,
            gradient_eq: potential_gradient(net, &eq.theta),
            potential_eq: potential_u(net, &eq.theta),
            alpha_bound,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn below_bound(&self) -> bool {
        self.alpha <= self.alpha_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovValue {
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

/// V = V1 + αV2 + V3 at one state. Angles may carry any common shift.
pub fn lyapunov_v(
    cfg: &LyapunovConfig,
    net: &Network,
    ctrl: &ControllerSpec,
    theta: &[f64],
    omega: &[f64],
    integral: f64,
    price: f64,
) -> Result<LyapunovValue> {
    let r = net.reference();
    let shift = theta[r] - cfg.theta_eq[r];
    let linear: f64 = theta
        .iter()
        .zip(&cfg.theta_eq)
        .zip(&cfg.gradient_eq)
        .map(|((t, te), g)| g * (t - shift - te))
        .sum();
    let kinetic: f64 = (0..net.n_machine())
        .map(|i| 0.5 * net.node(i).inertia * omega[i] * omega[i])
        .sum();
    let v1 = potential_u(net, theta) - cfg.potential_eq - linear + kinetic;
    let dispatched = ctrl
        .costs
        .iter()
        .map(|c| c.inverse_marginal(price))
        .sum::<Result<f64>>()?;
    let v2 = 0.5 * (dispatched - cfg.total_eq).powi(2);
    let momentum: f64 = (0..net.n_machine()).map(|i| net.node(i).inertia * omega[i]).sum();
    let v3 = 0.5 * cfg.k * cfg.k * (momentum + integral - cfg.integral_eq).powi(2);
    Ok(LyapunovValue {
        v: v1 + cfg.alpha * v2 + v3,
        v1,
        v2,
        v3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    /// Largest ΔV/Δt between consecutive samples.
    pub max_rate: f64,
    /// Fraction of sample intervals with ΔV ≤ 0.
    pub descending_fraction: f64,
    /// Intervals with ΔV/Δt above `tolerance`.
    pub violations: usize,
    pub tolerance: f64,
    pub alpha: f64,
    pub alpha_bound: f64,
    pub below_bound: bool,
    /// Largest |V2 − V3| seen.
    pub max_v2_v3_gap: f64,
}

/// Energy along a trajectory.
pub fn lyapunov_series(
    cfg: &LyapunovConfig,
    net: &Network,
    ctrl: &ControllerSpec,
    traj: &Trajectory,
) -> Result<Vec<LyapunovValue>> {
    (0..traj.len())
        .map(|n| {
            lyapunov_v(
                cfg,
                net,
                ctrl,
                &traj.theta[n],
                &traj.omega[n],
                traj.internal[n][0],
                traj.prices[n][0],
            )
        })
        .collect()
}

/// Differences V along the trajectory and counts increases above
/// `1e-6 + 10·dt`.
pub fn check_lyapunov_descent(
    cfg: &LyapunovConfig,
    net: &Network,
    ctrl: &ControllerSpec,
    traj: &Trajectory,
) -> Result<DescentReport> {
    let series = lyapunov_series(cfg, net, ctrl, traj)?;
    let tolerance = 1e-6 + 10.0 * traj.dt;
    let mut max_rate = f64::NEG_INFINITY;
    let mut descending = 0;
    let mut violations = 0;
    for n in 1..series.len() {
        let rate = (series[n].v - series[n - 1].v) / (traj.t[n] - traj.t[n - 1]);
        max_rate = max_rate.max(rate);
        if rate <= 0.0 {
            descending += 1;
        }
        if rate > tolerance {
            violations += 1;
        }
    }
    let intervals = series.len().saturating_sub(1);
    Ok(DescentReport {
        max_rate: if intervals == 0 { 0.0 } else { max_rate },
        descending_fraction: if intervals == 0 { 1.0 } else { descending as f64 / intervals as f64 },
        violations,
        tolerance,
        alpha: cfg.alpha,
        alpha_bound: cfg.alpha_bound,
        below_bound: cfg.below_bound(),
        max_v2_v3_gap: series.iter().map(|s| (s.v2 - s.v3).abs()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsOptions {
    /// Frequency band (p.u.) that counts as settled.
    pub settling_threshold: f64,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self {
            settling_threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Lowest machine frequency, Hz.
    pub nadir: f64,
    /// Lowest frequency over machines and frequency-dependent nodes, Hz.
    pub nadir_all_nodes: f64,
    /// max_t (|u_s(t)| − |u_s(end)|)⁺.
    pub max_overshoot_us: f64,
    /// First sample time after which max_i |ω_i| stays below the threshold.
    pub settling_time: Option<f64>,
    /// Largest marginal-cost gap between controllers sharing a price.
    pub marginal_spread: f64,
    /// Per area, max |P_ex − P_ex*| from the settling time on.
    pub export_deviation: Vec<f64>,
    pub final_total: f64,
    pub final_imbalance: f64,
    /// max_i |ω_i| at the last sample.
    pub final_max_omega: f64,
}

/// Controller positions that should share a marginal cost.
fn economic_groups(ctrl: &ControllerSpec) -> Vec<Vec<usize>> {
    match ctrl.law {
        Law::PiacMulti { .. } => ctrl.price_groups().to_vec(),
        _ => vec![(0..ctrl.nodes.len()).collect()],
    }
}

pub fn compute_metrics(traj: &Trajectory, net: &Network, ctrl: &ControllerSpec, opts: &MetricsOptions) -> Metrics {
    assert!(!traj.is_empty(), "metrics need a nonempty trajectory");
    let f0 = net.base_frequency();
    let hz = |w: f64| f0 + w * f0;
    let n_m = net.n_machine();
    let n_d = net.n_dynamic();
    let mut nadir = f64::INFINITY;
    let mut nadir_all = f64::INFINITY;
    for w in &traj.omega {
        for (i, &x) in w[..n_d].iter().enumerate() {
            if i < n_m {
                nadir = nadir.min(hz(x));
            }
            nadir_all = nadir_all.min(hz(x));
        }
    }
    if n_m == 0 {
        nadir = nadir_all;
    }
    let final_total = traj.final_total();
    let max_overshoot_us = traj
        .total
        .iter()
        .map(|u| (u.abs() - final_total.abs()).max(0.0))
        .fold(0.0, f64::max);

    let max_dev: Vec<f64> = traj
        .omega
        .iter()
        .map(|w| w[..n_d].iter().fold(0.0, |m: f64, x| m.max(x.abs())))
        .collect();
    let settle_index = match max_dev.iter().rposition(|&d| d >= opts.settling_threshold) {
        None => Some(0),
        Some(last) if last + 1 < traj.len() => Some(last + 1),
        Some(_) => None,
    };
    let settling_time = settle_index.map(|i| traj.t[i] - traj.t[0]);

    let groups = economic_groups(ctrl);
    let mut marginal_spread = 0.0f64;
    for mc in &traj.marginal_costs {
        for group in &groups {
            let (lo, hi) = group
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| (l.min(mc[p]), h.max(mc[p])));
            if hi >= lo {
                marginal_spread = marginal_spread.max(hi - lo);
            }
        }
    }

    let from = settle_index.unwrap_or(traj.len() - 1);
    let export_deviation = (0..traj.nominal_exports.len())
        .map(|r| {
            traj.exports[from..]
                .iter()
                .map(|e| (e[r] - traj.nominal_exports[r]).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    Metrics {
        nadir,
        nadir_all_nodes: nadir_all,
        max_overshoot_us,
        settling_time,
        marginal_spread,
        export_deviation,
        final_total,
        final_imbalance: *traj.imbalance.last().expect("nonempty"),
        final_max_omega: *max_dev.last().expect("nonempty"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, Disturbance, SimOptions};
    use crate::netmodel::fixtures::{triangle, two_node};
    use crate::netmodel::{LineSpec, Node};
    use crate::powerflow::{find_equilibrium, laplacian};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn plant() -> Network {
        Network::new(
            100.0,
            60.0,
            vec![
                Node::machine(1, 0.5, 1.0, 0.2).with_controller(1.0),
                Node::machine(2, 0.3, 0.8, -0.1).with_controller(0.5),
                Node::freq(3, 1.2, -0.1),
            ],
            &[LineSpec::new(1, 2, 3.0), LineSpec::new(2, 3, 2.5), LineSpec::new(1, 3, 1.5)],
        )
        .unwrap()
    }

    #[test]
    fn potential_examples() {
        let net = Network::new(
            100.0,
            60.0,
            vec![Node::machine(1, 1.0, 1.0, 0.0), Node::freq(2, 1.0, 0.0)],
            &[LineSpec::new(1, 2, 1.0)],
        )
        .unwrap();
        assert_eq!(potential_u(&net, &[0.0, 0.0]), 0.0);
        assert!((potential_u(&net, &[0.0, PI / 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_has_zero_energy() {
        let net = plant();
        let ctrl = ControllerSpec::piac(&net, 4.0).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let cfg = LyapunovConfig::new(&net, &ctrl, &eq).unwrap();
        let v = lyapunov_v(&cfg, &net, &ctrl, &eq.theta, &[0.0; 3], eq.controller.internal[0], eq.controller.prices[0])
            .unwrap();
        assert!(v.v.abs() < 1e-14 && v.v1.abs() < 1e-14 && v.v2 == 0.0 && v.v3.abs() < 1e-28);
        assert!((cfg.alpha - 2.0 / (4.0 * 0.8)).abs() < 1e-15);
    }

    #[test]
    fn kinetic_term_alone() {
        let net = plant();
        let ctrl = ControllerSpec::piac(&net, 4.0).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let cfg = LyapunovConfig::new(&net, &ctrl, &eq).unwrap();
        let omega = [0.01, -0.02, 0.0];
        let momentum = 0.5 * 0.01 + 0.3 * -0.02;
        // Shift η so that u_s is unchanged and λ = λ*.
        let eta = eq.controller.internal[0] - momentum;
        let v = lyapunov_v(&cfg, &net, &ctrl, &eq.theta, &omega, eta, eq.controller.prices[0]).unwrap();
        let kinetic = 0.5 * (0.5 * 1e-4 + 0.3 * 4e-4);
        assert!((v.v1 - kinetic).abs() < 1e-15);
        assert!(v.v2 == 0.0 && v.v3.abs() < 1e-30);
    }

    #[test]
    fn descent_along_piac_trajectory() {
        let net = plant();
        let ctrl = ControllerSpec::piac(&net, 4.0).unwrap();
        let opts = SimOptions {
            t_max: 10.0,
            ..SimOptions::default()
        };
        let dist = [Disturbance { t: 0.0, node: 3, dp: -0.2 }];
        let traj = simulate(&net, &ctrl, &dist, &opts).unwrap();
        let post = net.with_injection_change(2, -0.2);
        let eq = find_equilibrium(&post, &ctrl).unwrap();
        let cfg = LyapunovConfig::new(&post, &ctrl, &eq).unwrap();
        let report = check_lyapunov_descent(&cfg, &post, &ctrl, &traj).unwrap();
        assert_eq!(report.violations, 0, "{report:?}");
        assert!(report.max_v2_v3_gap < 1e-10);
        assert!(!report.below_bound);
    }

    #[test]
    fn trajectory_at_rest_has_constant_energy() {
        let net = plant();
        let ctrl = ControllerSpec::piac(&net, 4.0).unwrap();
        let opts = SimOptions { t_max: 1.0, ..SimOptions::default() };
        let traj = simulate(&net, &ctrl, &[], &opts).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let cfg = LyapunovConfig::new(&net, &ctrl, &eq).unwrap().with_alpha(0.1);
        let report = check_lyapunov_descent(&cfg, &net, &ctrl, &traj).unwrap();
        assert!(report.max_rate.abs() < 1e-12);
        assert!(report.below_bound);
    }

    #[test]
    fn undisturbed_metrics() {
        let net = two_node();
        let ctrl = ControllerSpec::piac(&net, 10.0).unwrap();
        let opts = SimOptions { t_max: 1.0, ..SimOptions::default() };
        let traj = simulate(&net, &ctrl, &[], &opts).unwrap();
        let m = compute_metrics(&traj, &net, &ctrl, &MetricsOptions::default());
        assert_eq!(m.nadir, 60.0);
        assert_eq!(m.max_overshoot_us, 0.0);
        assert_eq!(m.settling_time, Some(0.0));
    }

    #[test]
    fn hessian_matches_laplacian() {
        let net = plant();
        let phi = [0.0, -0.3, 0.4];
        let l = laplacian(&net, &phi);
        let h = 1e-4;
        for a in 1..3 {
            for b in 1..3 {
                let at = |da: f64, db: f64| {
                    let mut p = phi;
                    p[a] += da;
                    p[b] += db;
                    potential_u(&net, &p)
                };
                let fd = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
                assert!((fd - l[(a - 1, b - 1)]).abs() < 1e-5, "({a},{b}): {fd} vs {}", l[(a - 1, b - 1)]);
            }
        }
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(phi in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let net = triangle(1.3);
            let g = potential_gradient(&net, &phi);
            let h = 1e-6;
            for i in 0..3 {
                let mut up = phi.clone();
                let mut dn = phi.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (potential_u(&net, &up) - potential_u(&net, &dn)) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() < 1e-6);
            }
            prop_assert!(potential_u(&net, &phi) >= 0.0);
        }

        #[test]
        fn energy_positive_near_equilibrium(
            d in proptest::collection::vec(-0.1f64..0.1, 6),
        ) {
            let net = plant();
            let ctrl = ControllerSpec::piac(&net, 4.0).unwrap();
            let eq = find_equilibrium(&net, &ctrl).unwrap();
            let cfg = LyapunovConfig::new(&net, &ctrl, &eq).unwrap();
            let theta = [eq.theta[0], eq.theta[1] + d[0], eq.theta[2] + d[1]];
            let omega = [d[2], d[3], 0.0];
            let v = lyapunov_v(&cfg, &net, &ctrl, &theta, &omega,
                eq.controller.internal[0] + d[4], eq.controller.prices[0] + d[5]).unwrap();
            prop_assume!(d.iter().any(|x| *x != 0.0));
            prop_assert!(v.v > 0.0);
        }
    }
}
