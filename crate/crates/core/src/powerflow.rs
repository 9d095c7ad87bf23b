//! Algebraic power-flow equations, equilibria and the security region.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::controllers::{ControllerSpec, ControllerState, Law};
use crate::dispatch::clear;
use crate::error::{Error, Result};
use crate::netmodel::Network;

/// Margin below π/2 at which a line angle is flagged as near the boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub theta: Vec<f64>,
    /// Max-norm of the residual at the unknown nodes.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Some line has |θ_i − θ_j| ≥ π/2 − [`BOUNDARY_MARGIN`].
    pub near_boundary: bool,
}

/// (Σ P_i + Σ u_i) / Σ D_i: the common frequency of a synchronous state.
pub fn synchronized_frequency(net: &Network, inputs: &[f64]) -> f64 {
    let agg = net.aggregate_constants();
    (agg.imbalance + inputs.iter().sum::<f64>()) / agg.droop
}

fn residuals(net: &Network, injections: &[f64], theta: &[f64], unknown: &[usize]) -> DVector<f64> {
    DVector::from_iterator(
        unknown.len(),
        unknown.iter().map(|&i| injections[i] - net.outflow(i, theta)),
    )
}

fn flow_jacobian(net: &Network, theta: &[f64], unknown: &[usize], slot: &[Option<usize>]) -> DMatrix<f64> {
    let m = unknown.len();
    let mut jac = DMatrix::zeros(m, m);
    for (r, &i) in unknown.iter().enumerate() {
        for &(j, b) in net.neighbors(i) {
            let c = b * (theta[i] - theta[j]).cos();
            jac[(r, r)] += c;
            if let Some(col) = slot[j] {
                jac[(r, col)] -= c;
            }
        }
    }
    jac
}

/// Solves P_i = Σ_j B_ij sin(θ_i − θ_j) for the angles at `unknown`,
/// holding every other entry of `initial` fixed. `initial` also supplies
/// the starting guess for the unknowns.
pub fn solve_algebraic(
    net: &Network,
    injections: &[f64],
    initial: &[f64],
    unknown: &[usize],
    opts: &FlowOptions,
) -> Result<FlowSolution> {
    assert_eq!(injections.len(), net.n());
    assert_eq!(initial.len(), net.n());
    let mut theta = initial.to_vec();
    if unknown.is_empty() {
        let near_boundary = !security_check(net, &theta).margin_ok;
        return Ok(FlowSolution {
            theta,
            residual_norm: 0.0,
            iterations: 0,
            near_boundary,
        });
    }
    let mut slot = vec![None; net.n()];
    for (k, &i) in unknown.iter().enumerate() {
        slot[i] = Some(k);
    }
    let mut res = residuals(net, injections, &theta, unknown);
    let mut iterations = 0;
    while res.amax() > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: res.amax(),
            });
        }
        iterations += 1;
        let jac = flow_jacobian(net, &theta, unknown, &slot);
        let step = jac.lu().solve(&res).ok_or(Error::SingularJacobian)?;
        if step.iter().any(|s| !s.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let norm = res.norm();
        let mut scale = 1.0;
        let mut trial = theta.clone();
        let mut trial_res = res.clone();
        for _ in 0..=opts.max_halvings {
            for (k, &i) in unknown.iter().enumerate() {
                trial[i] = theta[i] + scale * step[k];
            }
            trial_res = residuals(net, injections, &trial, unknown);
            if trial_res.norm() < norm {
                break;
            }
            scale *= 0.5;
        }
        theta = trial;
        res = trial_res;
    }
    let near_boundary = !security_check(net, &theta).margin_ok;
    Ok(FlowSolution {
        theta,
        residual_norm: res.amax(),
        iterations,
        near_boundary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityReport {
    /// Every line satisfies |θ_i − θ_j| < π/2.
    pub secure: bool,
    /// Every line satisfies |θ_i − θ_j| < π/2 − [`BOUNDARY_MARGIN`].
    pub margin_ok: bool,
    /// Node id pairs (from, to) of lines violating the strict bound.
    pub violations: Vec<(u32, u32)>,
}

pub fn security_check(net: &Network, theta: &[f64]) -> SecurityReport {
    let mut violations = Vec::new();
    let mut margin_ok = true;
    for line in net.lines() {
        let d = (theta[line.from] - theta[line.to]).abs();
        if d >= FRAC_PI_2 - BOUNDARY_MARGIN {
            margin_ok = false;
        }
        if d >= FRAC_PI_2 {
            violations.push((net.node(line.from).id, net.node(line.to).id));
        }
    }
    SecurityReport {
        secure: violations.is_empty(),
        margin_ok,
        violations,
    }
}

/// Weighted Laplacian with entries B_ij cos(φ_i − φ_j), all nodes.
pub fn full_laplacian(net: &Network, phi: &[f64]) -> DMatrix<f64> {
    let n = net.n();
    let mut l = DMatrix::zeros(n, n);
    for line in net.lines() {
        let (i, j) = (line.from, line.to);
        let c = line.susceptance * (phi[i] - phi[j]).cos();
        l[(i, i)] += c;
        l[(j, j)] += c;
        l[(i, j)] -= c;
        l[(j, i)] -= c;
    }
    l
}

/// Hessian of the potential energy in relative angles: the weighted
/// Laplacian with the reference row and column removed.
pub fn laplacian(net: &Network, phi: &[f64]) -> DMatrix<f64> {
    full_laplacian(net, phi).remove_row(net.reference()).remove_column(net.reference())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Angles with the reference node pinned (to 0, or to the supplied
    /// reference angle for decentralized PIAC).
    pub theta: Vec<f64>,
    /// Controller state at the equilibrium, with ω = 0.
    pub controller: ControllerState,
    pub flow: FlowSolution,
    pub secure: bool,
}

impl Equilibrium {
    pub fn inputs(&self) -> &[f64] {
        &self.controller.inputs
    }
}

/// Steady state of the closed loop: zero frequency deviation, inputs
/// balancing the injections, and angles solving the flow equations.
pub fn find_equilibrium(net: &Network, ctrl: &ControllerSpec) -> Result<Equilibrium> {
    let n = net.n();
    let p = net.injections();
    let p_s: f64 = p.iter().sum();
    let mut inputs = vec![0.0; n];
    let mut start = vec![0.0; n];
    let internal = match &ctrl.law {
        Law::PiacSingle { k } => {
            let r = clear(&ctrl.costs, -p_s)?;
            scatter(&mut inputs, &ctrl.nodes, &r.inputs);
            vec![p_s / k]
        }
        Law::Agc { .. } | Law::GatherBroadcast { .. } => {
            let r = clear(&ctrl.costs, -p_s)?;
            scatter(&mut inputs, &ctrl.nodes, &r.inputs);
            vec![r.price]
        }
        Law::Dai { .. } => {
            let r = clear(&ctrl.costs, -p_s)?;
            scatter(&mut inputs, &ctrl.nodes, &r.inputs);
            vec![r.price; ctrl.nodes.len()]
        }
        Law::PiacMulti { gains, partition } => {
            let mut eta = Vec::with_capacity(partition.len());
            for (r, area) in partition.areas().iter().enumerate() {
                let area_p: f64 = area.nodes.iter().map(|&i| p[i]).sum();
                let target = area.nominal_export - area_p;
                let group = &ctrl.price_groups()[r];
                let costs: Vec<_> = group.iter().map(|&q| ctrl.costs[q]).collect();
                let res = clear(&costs, target).map_err(|e| Error::Area {
                    area: area.name.clone(),
                    source: Box::new(e),
                })?;
                for (&q, &u) in group.iter().zip(&res.inputs) {
                    inputs[ctrl.nodes[q]] = u;
                }
                eta.push(-target / gains[r]);
            }
            eta
        }
        Law::PiacDecentralized { gains, reference } => {
            start.clone_from(reference);
            ctrl.nodes
                .iter()
                .enumerate()
                .map(|(q, &i)| {
                    let u = -p[i] + net.outflow(i, reference);
                    inputs[i] = u;
                    -u / gains[q]
                })
                .collect()
        }
    };
    let total: Vec<f64> = p.iter().zip(&inputs).map(|(a, b)| a + b).collect();
    let unknown: Vec<usize> = (0..n).filter(|&i| i != net.reference()).collect();
    let flow = solve_algebraic(net, &total, &start, &unknown, &FlowOptions::default())?;
    let controller = ctrl.state_from_internal(net, internal, &vec![0.0; n])?;
    let secure = security_check(net, &flow.theta).secure;
    Ok(Equilibrium {
        theta: flow.theta.clone(),
        controller,
        flow,
        secure,
    })
}

fn scatter(dst: &mut [f64], nodes: &[usize], values: &[f64]) {
    for (&i, &v) in nodes.iter().zip(values) {
        dst[i] = v;
    }
}
