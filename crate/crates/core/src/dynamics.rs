//! Closed-loop integration of the network DAE with a secondary controller.
//!
//! The differential state is the angle at every machine and
//! frequency-dependent node, the machine frequencies and the controller's
//! internal state. Frequency-dependent frequencies are read off their
//! algebraic balance; passive angles are re-solved after each advance.

use crate::controllers::{ControllerSpec, ControllerState, Measurements};
use crate::error::{Error, Result};
use crate::netmodel::{AreaPartition, Network};
use crate::powerflow::{find_equilibrium, solve_algebraic, Equilibrium, FlowOptions};

/// Disturbances are applied at the first step with t ≥ t_d − this.
const TIME_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Forward Euler, the default.
    #[default]
    Euler,
    /// Classical fourth-order Runge-Kutta; a reference solution only.
    Rk4,
}

/// Step change of the injection at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub t: f64,
    pub node: u32,
    pub dp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
    pub integrator: Integrator,
    pub flow: FlowOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 60.0,
            stride: 10,
            integrator: Integrator::Euler,
            flow: FlowOptions::default(),
        }
    }
}

/// A consistent point of the closed loop: frequencies at
/// frequency-dependent nodes and controller outputs agree with the
/// differential state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Angles at every node.
    pub theta: Vec<f64>,
    /// Frequency deviation at every node; zero at passive nodes.
    pub omega: Vec<f64>,
    pub controller: ControllerState,
}

/// Right-hand side of the network equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    /// θ̇ at machine and frequency-dependent nodes.
    pub theta: Vec<f64>,
    /// ω̇ at machines.
    pub omega: Vec<f64>,
    /// ω at machines (given) and frequency-dependent nodes (solved).
    pub frequencies: Vec<f64>,
}

/// Network derivatives for given injections, angles, machine frequencies
/// and inputs. `omega` needs valid entries at machines only.
pub fn derivatives(net: &Network, injections: &[f64], theta: &[f64], omega: &[f64], inputs: &[f64]) -> Derivatives {
    let n_m = net.n_machine();
    let n_d = net.n_dynamic();
    let mut frequencies = Vec::with_capacity(n_d);
    let mut omega_dot = Vec::with_capacity(n_m);
    for i in 0..n_d {
        let node = net.node(i);
        let balance = injections[i] - net.outflow(i, theta) + inputs[i];
        if i < n_m {
            frequencies.push(omega[i]);
            omega_dot.push((balance - node.droop * omega[i]) / node.inertia);
        } else {
            frequencies.push(balance / node.droop);
        }
    }
    Derivatives {
        theta: frequencies.clone(),
        omega: omega_dot,
        frequencies,
    }
}

/// φ_i = θ_i − θ_ref.
pub fn to_phi_coordinates(theta: &[f64], reference: usize) -> Vec<f64> {
    let r = theta[reference];
    theta.iter().map(|&t| t - r).collect()
}

/// Network, controller and the current injections.
struct Plant<'a> {
    net: &'a Network,
    ctrl: &'a ControllerSpec,
    injections: Vec<f64>,
    flow: FlowOptions,
    passive: Vec<usize>,
}

/// Flat differential state.
#[derive(Clone)]
struct Flat {
    theta: Vec<f64>,
    omega: Vec<f64>,
    internal: Vec<f64>,
}

impl Flat {
    fn axpy(&self, h: f64, d: &FlatRate) -> Flat {
        let add = |x: &[f64], v: &[f64]| x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        Flat {
            theta: add(&self.theta, &d.theta),
            omega: add(&self.omega, &d.omega),
            internal: add(&self.internal, &d.internal),
        }
    }
}

struct FlatRate {
    theta: Vec<f64>,
    omega: Vec<f64>,
    internal: Vec<f64>,
}

impl<'a> Plant<'a> {
    fn new(net: &'a Network, ctrl: &'a ControllerSpec, flow: FlowOptions) -> Self {
        Self {
            net,
            ctrl,
            injections: net.injections(),
            flow,
            passive: (net.n_dynamic()..net.n()).collect(),
        }
    }

    /// Full angle vector from dynamic angles, solving passive angles
    /// warm-started from `warm`.
    fn complete_angles(&self, theta_dyn: &[f64], warm: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut theta = warm.to_vec();
        theta[..theta_dyn.len()].copy_from_slice(theta_dyn);
        if self.passive.is_empty() {
            return Ok(theta);
        }
        solve_algebraic(self.net, &self.injections, &theta, &self.passive, &self.flow)
            .map(|s| s.theta)
            .map_err(|e| Error::AlgebraicDivergence {
                t,
                source: Box::new(e),
            })
    }

    fn flatten(&self, state: &SimState) -> Flat {
        Flat {
            theta: state.theta[..self.net.n_dynamic()].to_vec(),
            omega: state.omega[..self.net.n_machine()].to_vec(),
            internal: state.controller.internal.clone(),
        }
    }

    /// Consistent state from differential values and full angles.
    fn assemble(&self, t: f64, theta: Vec<f64>, omega_m: &[f64], internal: Vec<f64>) -> Result<SimState> {
        let n = self.net.n();
        let mut omega = vec![0.0; n];
        omega[..omega_m.len()].copy_from_slice(omega_m);
        let controller = self.ctrl.state_from_internal(self.net, internal, &omega)?;
        let d = derivatives(self.net, &self.injections, &theta, &omega, &controller.inputs);
        omega[..d.frequencies.len()].copy_from_slice(&d.frequencies);
        Ok(SimState {
            t,
            theta,
            omega,
            controller,
        })
    }

    fn rate(&self, state: &SimState) -> FlatRate {
        let d = derivatives(self.net, &self.injections, &state.theta, &state.omega, &state.controller.inputs);
        let meas = Measurements {
            omega: &state.omega,
            theta: &state.theta,
        };
        FlatRate {
            theta: d.theta,
            omega: d.omega,
            internal: self.ctrl.internal_derivative(self.net, &state.controller, &meas),
        }
    }

    fn state_at(&self, t: f64, x: &Flat, warm: &[f64]) -> Result<SimState> {
        let theta = self.complete_angles(&x.theta, warm, t)?;
        self.assemble(t, theta, &x.omega, x.internal.clone())
    }

    fn step(&self, state: &SimState, dt: f64, integrator: Integrator) -> Result<SimState> {
        let x = self.flatten(state);
        let t1 = state.t + dt;
        match integrator {
            Integrator::Euler => {
                let k1 = self.rate(state);
                self.state_at(t1, &x.axpy(dt, &k1), &state.theta)
            }
            Integrator::Rk4 => {
                let half = state.t + 0.5 * dt;
                let k1 = self.rate(state);
                let s2 = self.state_at(half, &x.axpy(0.5 * dt, &k1), &state.theta)?;
                let k2 = self.rate(&s2);
                let s3 = self.state_at(half, &x.axpy(0.5 * dt, &k2), &s2.theta)?;
                let k3 = self.rate(&s3);
                let s4 = self.state_at(t1, &x.axpy(dt, &k3), &s3.theta)?;
                let k4 = self.rate(&s4);
                let combine = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
                    (0..a.len())
                        .map(|i| (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) / 6.0)
                        .collect()
                };
                let avg = FlatRate {
                    theta: combine(&k1.theta, &k2.theta, &k3.theta, &k4.theta),
                    omega: combine(&k1.omega, &k2.omega, &k3.omega, &k4.omega),
                    internal: combine(&k1.internal, &k2.internal, &k3.internal, &k4.internal),
                };
                self.state_at(t1, &x.axpy(dt, &avg), &s4.theta)
            }
        }
    }
}

impl SimState {
    /// The closed loop at rest at an equilibrium.
    pub fn at_equilibrium(eq: &Equilibrium) -> Self {
        Self {
            t: 0.0,
            theta: eq.theta.clone(),
            omega: vec![0.0; eq.theta.len()],
            controller: eq.controller.clone(),
        }
    }
}

/// One integrator step with fixed injections.
pub fn step(
    net: &Network,
    ctrl: &ControllerSpec,
    injections: &[f64],
    state: &SimState,
    dt: f64,
    integrator: Integrator,
) -> Result<SimState> {
    let mut plant = Plant::new(net, ctrl, FlowOptions::default());
    plant.injections.copy_from_slice(injections);
    plant.step(state, dt, integrator)
}

/// Sampled closed-loop trajectory. Vectors of vectors are indexed
/// `[sample][entry]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub stride: usize,
    pub t: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    /// Per-node inputs.
    pub inputs: Vec<Vec<f64>>,
    /// u_s.
    pub total: Vec<f64>,
    pub prices: Vec<Vec<f64>>,
    pub internal: Vec<Vec<f64>>,
    /// J'_i(u_i) per controller node.
    pub marginal_costs: Vec<Vec<f64>>,
    /// Export per area; empty when no partition is known.
    pub exports: Vec<Vec<f64>>,
    /// Nominal export per area.
    pub nominal_exports: Vec<f64>,
    /// P_s = Σ P_i.
    pub imbalance: Vec<f64>,
    /// Abstract frequency ω_s.
    pub abstract_frequency: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Steady-state reference for overshoot: the last recorded u_s.
    pub fn final_total(&self) -> f64 {
        *self.total.last().expect("nonempty trajectory")
    }

    fn with_capacity(dt: f64, stride: usize, cap: usize, nominal_exports: Vec<f64>) -> Self {
        Self {
            dt,
            stride,
            t: Vec::with_capacity(cap),
            theta: Vec::with_capacity(cap),
            omega: Vec::with_capacity(cap),
            inputs: Vec::with_capacity(cap),
            total: Vec::with_capacity(cap),
            prices: Vec::with_capacity(cap),
            internal: Vec::with_capacity(cap),
            marginal_costs: Vec::with_capacity(cap),
            exports: Vec::with_capacity(cap),
            nominal_exports,
            imbalance: Vec::with_capacity(cap),
            abstract_frequency: Vec::with_capacity(cap),
        }
    }
}

fn export_partition<'a>(net: &'a Network, ctrl: &'a ControllerSpec) -> Option<&'a AreaPartition> {
    match &ctrl.law {
        crate::controllers::Law::PiacMulti { partition, .. } => Some(partition),
        _ => net.partition(),
    }
}

/// Runs the closed loop from the equilibrium of `net` under `ctrl`.
pub fn simulate(
    net: &Network,
    ctrl: &ControllerSpec,
    disturbances: &[Disturbance],
    opts: &SimOptions,
) -> Result<Trajectory> {
    let eq = find_equilibrium(net, ctrl)?;
    simulate_from(net, ctrl, SimState::at_equilibrium(&eq), disturbances, opts)
}

/// Runs the closed loop from an arbitrary consistent initial state.
pub fn simulate_from(
    net: &Network,
    ctrl: &ControllerSpec,
    initial: SimState,
    disturbances: &[Disturbance],
    opts: &SimOptions,
) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.t_max >= 0.0 && opts.stride > 0) {
        return Err(Error::Validation("dt and stride must be positive and t_max nonnegative".into()));
    }
    let mut pending: Vec<(usize, f64, f64)> = Vec::with_capacity(disturbances.len());
    for d in disturbances {
        if !(d.t >= 0.0) {
            return Err(Error::Validation(format!("disturbance time {} is negative", d.t)));
        }
        pending.push((net.require_index(d.node)?, d.t, d.dp));
    }
    let mut plant = Plant::new(net, ctrl, opts.flow);
    let agg = net.aggregate_constants();
    let partition = export_partition(net, ctrl);
    let nominal = partition
        .map(|p| p.areas().iter().map(|a| a.nominal_export).collect())
        .unwrap_or_default();
    let n_steps = (opts.t_max / opts.dt).round() as usize;
    let mut traj = Trajectory::with_capacity(opts.dt, opts.stride, n_steps / opts.stride + 1, nominal);

    let mut state = plant.assemble(initial.t, initial.theta, &initial.omega[..net.n_machine()], initial.controller.internal)?;
    let mut omega_s = 0.0;
    let t0 = state.t;
    for n in 0..=n_steps {
        let t = t0 + n as f64 * opts.dt;
        let mut changed = false;
        for &(i, td, dp) in &pending {
            let now = t + TIME_SLACK;
            let prev = if n == 0 { f64::NEG_INFINITY } else { now - opts.dt };
            if td <= now && td > prev {
                plant.injections[i] += dp;
                changed = true;
            }
        }
        if changed {
            let theta = plant.complete_angles(&state.theta[..net.n_dynamic()], &state.theta, t)?;
            let omega_m = state.omega[..net.n_machine()].to_vec();
            state = plant.assemble(t, theta, &omega_m, state.controller.internal)?;
        }
        let p_s: f64 = plant.injections.iter().sum();
        if agg.inertia == 0.0 {
            omega_s = (p_s + state.controller.total) / agg.droop;
        }
        if n % opts.stride == 0 {
            traj.t.push(t);
            traj.theta.push(state.theta.clone());
            traj.omega.push(state.omega.clone());
            traj.inputs.push(state.controller.inputs.clone());
            traj.total.push(state.controller.total);
            traj.prices.push(state.controller.prices.clone());
            traj.internal.push(state.controller.internal.clone());
            traj.marginal_costs.push(ctrl.marginal_costs(&state.controller)?);
            traj.exports.push(partition.map(|p| p.exports(&state.theta)).unwrap_or_default());
            traj.imbalance.push(p_s);
            traj.abstract_frequency.push(omega_s);
        }
        if n == n_steps {
            break;
        }
        if agg.inertia > 0.0 {
            omega_s += opts.dt * (p_s - agg.droop * omega_s + state.controller.total) / agg.inertia;
        }
        state = plant.step(&state, opts.dt, opts.integrator)?;
        state.t = t0 + (n + 1) as f64 * opts.dt;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::fixtures::two_node;
    use crate::netmodel::{LineSpec, Node};
    use proptest::prelude::*;

    fn with_passive() -> Network {
        Network::new(
            100.0,
            60.0,
            vec![
                Node::machine(1, 0.2, 1.0, 0.3).with_controller(1.0),
                Node::machine(2, 0.1, 0.5, 0.0).with_controller(2.0),
                Node::freq(3, 1.0, -0.1),
                Node::passive(4, -0.2),
            ],
            &[
                LineSpec::new(1, 2, 4.0),
                LineSpec::new(2, 4, 3.0),
                LineSpec::new(4, 3, 5.0),
                LineSpec::new(1, 3, 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let net = with_passive();
        let ctrl = ControllerSpec::piac(&net, 5.0).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let mut state = SimState::at_equilibrium(&eq);
        for _ in 0..100 {
            state = step(&net, &ctrl, &net.injections(), &state, 1e-3, Integrator::Euler).unwrap();
        }
        for (a, b) in state.theta.iter().zip(&eq.theta) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(state.omega.iter().all(|w| w.abs() < 1e-10));
    }

    #[test]
    fn isolated_machine_accelerates() {
        let net = Network::new(100.0, 60.0, vec![Node::machine(1, 1.0, 1.0, 0.1)], &[]).unwrap();
        let d = derivatives(&net, &[0.1], &[0.0], &[0.0], &[0.0]);
        assert_eq!(d.omega, vec![0.1]);
        assert_eq!(d.theta, vec![0.0]);
    }

    fn aggregate_gap(net: &Network, state: &SimState, p: &[f64]) -> f64 {
        let d = derivatives(net, p, &state.theta, &state.omega, &state.controller.inputs);
        let lhs: f64 = (0..net.n_machine()).map(|i| net.node(i).inertia * d.omega[i]).sum();
        let rhs = p.iter().sum::<f64>()
            - (0..net.n_dynamic()).map(|i| net.node(i).droop * state.omega[i]).sum::<f64>()
            + state.controller.inputs.iter().sum::<f64>();
        (lhs - rhs).abs()
    }

    #[test]
    fn aggregate_identity_holds_along_trajectory() {
        let net = with_passive();
        let ctrl = ControllerSpec::piac(&net, 5.0).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let p = net.with_injection_change(2, -0.3).injections();
        let mut state = SimState::at_equilibrium(&eq);
        for _ in 0..500 {
            state = step(&net, &ctrl, &p, &state, 1e-3, Integrator::Euler).unwrap();
            assert!(aggregate_gap(&net, &state, &p) < 1e-10);
            let passive_residual = p[3] - net.outflow(3, &state.theta);
            assert!(passive_residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn phi_coordinates() {
        assert_eq!(to_phi_coordinates(&[0.1, 0.3], 0), vec![0.0, 0.3 - 0.1]);
    }

    #[test]
    fn undisturbed_run_stays_at_rest() {
        let net = with_passive();
        let ctrl = ControllerSpec::piac(&net, 5.0).unwrap();
        let opts = SimOptions {
            t_max: 10.0,
            ..SimOptions::default()
        };
        let traj = simulate(&net, &ctrl, &[], &opts).unwrap();
        assert_eq!(traj.len(), 1001);
        for w in &traj.omega {
            assert!(w.iter().all(|x| x.abs() <= 1e-9));
        }
        for pair in traj.t.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn disturbance_lands_on_first_step_at_or_after_its_time() {
        let net = two_node();
        let ctrl = ControllerSpec::piac(&net, 10.0).unwrap();
        let opts = SimOptions {
            dt: 0.1,
            t_max: 1.0,
            stride: 1,
            ..SimOptions::default()
        };
        let traj = simulate(&net, &ctrl, &[Disturbance { t: 0.3, node: 2, dp: -0.5 }], &opts).unwrap();
        assert_eq!(traj.imbalance[2], 0.0);
        assert_eq!(traj.imbalance[3], -0.5);
        let late = simulate(&net, &ctrl, &[Disturbance { t: 0.35, node: 2, dp: -0.5 }], &opts).unwrap();
        assert_eq!(late.imbalance[3], 0.0);
        assert_eq!(late.imbalance[4], -0.5);
    }

    #[test]
    fn euler_error_halves_with_step() {
        let net = two_node();
        let ctrl = ControllerSpec::piac(&net, 10.0).unwrap();
        let eq = find_equilibrium(&net, &ctrl).unwrap();
        let p = net.with_injection_change(0, -0.5).injections();
        let run = |dt: f64, integrator| {
            let mut state = SimState::at_equilibrium(&eq);
            let steps = (0.5 / dt).round() as usize;
            for _ in 0..steps {
                state = step(&net, &ctrl, &p, &state, dt, integrator).unwrap();
            }
            state.omega[0]
        };
        let reference = run(1e-4, Integrator::Rk4);
        let e1 = (run(2e-3, Integrator::Euler) - reference).abs();
        let e2 = (run(1e-3, Integrator::Euler) - reference).abs();
        let ratio = e1 / e2;
        assert!((ratio - 2.0).abs() < 0.3, "error ratio {ratio}");
    }

    proptest! {
        #[test]
        fn angle_shift_changes_nothing(shift in -3.0f64..3.0, w in -0.05f64..0.05) {
            let net = with_passive();
            let ctrl = ControllerSpec::piac(&net, 5.0).unwrap();
            let eq = find_equilibrium(&net, &ctrl).unwrap();
            let mut omega = vec![0.0; net.n()];
            omega[0] = w;
            let internal = vec![0.1];
            let base = ctrl.state_from_internal(&net, internal.clone(), &omega).unwrap();
            let shifted: Vec<f64> = eq.theta.iter().map(|t| t + shift).collect();
            let p = net.injections();
            let d0 = derivatives(&net, &p, &eq.theta, &omega, &base.inputs);
            let d1 = derivatives(&net, &p, &shifted, &omega, &base.inputs);
            for (a, b) in d0.omega.iter().zip(&d1.omega) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for (a, b) in d0.frequencies.iter().zip(&d1.frequencies) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            let phi0 = to_phi_coordinates(&eq.theta, 0);
            let phi1 = to_phi_coordinates(&shifted, 0);
            for line in net.lines() {
                prop_assert!((net.line_flow(line, &phi0) - net.line_flow(line, &eq.theta)).abs() <= 1e-12);
                prop_assert!((net.line_flow(line, &phi1) - net.line_flow(line, &shifted)).abs() <= 1e-12);
            }
        }
    }
}
