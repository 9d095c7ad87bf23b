//! Secondary frequency control laws.
//!
//! Every law is split into an output map (internal state and current
//! frequencies to per-node inputs) and an internal-state derivative, so
//! the plant integrator can advance controller and network in lockstep.
//! The `*_step` functions wrap both into a forward-Euler update for callers
//! driving a controller directly.

use crate::dispatch::{clear, CostModel, DEFAULT_BARRIER_WEIGHT};
use crate::error::{Error, Result};
use crate::netmodel::{AreaPartition, Network};

#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// Centralized PIAC over the whole network.
    PiacSingle { k: f64 },
    /// One PIAC coordinator per area; gains per area.
    PiacMulti {
        gains: Vec<f64>,
        partition: AreaPartition,
    },
    /// Node-local PIAC. `gains` per controller node; `reference` holds the
    /// steady-state angles from tertiary control (all nodes).
    PiacDecentralized { gains: Vec<f64>, reference: Vec<f64> },
    /// Single-area AGC integrating the frequency at one node.
    Agc { k: f64, node: usize },
    /// Gather-Broadcast: integral of a convex combination of frequencies.
    /// `weights` per dynamic node (canonical indices `0..n_dynamic`).
    GatherBroadcast { k: f64, weights: Vec<f64> },
    /// Distributed averaging integral control. `gains` per controller node;
    /// `edges` are (a, b, w_ab) between positions in the controller list.
    Dai {
        gains: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
    },
}

impl Law {
    pub fn name(&self) -> &'static str {
        match self {
            Law::PiacSingle { .. } => "piac",
            Law::PiacMulti { .. } => "piac_multi",
            Law::PiacDecentralized { .. } => "piac_decentralized",
            Law::Agc { .. } => "agc",
            Law::GatherBroadcast { .. } => "gb",
            Law::Dai { .. } => "dai",
        }
    }
}

/// A control law bound to the controller nodes of a network and their
/// cost models.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    pub law: Law,
    /// Canonical indices of controller nodes.
    pub nodes: Vec<usize>,
    /// Cost model per controller node, aligned with `nodes`.
    pub costs: Vec<CostModel>,
    /// For each price in the state, the positions (into `nodes`) that
    /// share it. Empty groups list for laws without prices.
    groups: Vec<Vec<usize>>,
}

fn check_gain(k: f64, what: &str) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} must be positive, got {k}")))
    }
}

fn site_costs(net: &Network, nodes: &[usize]) -> Result<Vec<CostModel>> {
    nodes
        .iter()
        .map(|&i| {
            let site = net.node(i).controller.as_ref().expect("controller node");
            CostModel::for_site(site, DEFAULT_BARRIER_WEIGHT)
        })
        .collect()
}

impl ControllerSpec {
    fn build(net: &Network, law: Law) -> Result<Self> {
        let nodes = net.controller_nodes();
        if nodes.is_empty() {
            return Err(Error::Validation("network has no controller nodes".into()));
        }
        let costs = site_costs(net, &nodes)?;
        let all: Vec<usize> = (0..nodes.len()).collect();
        let groups = match &law {
            Law::PiacSingle { .. } | Law::Agc { .. } | Law::GatherBroadcast { .. } => vec![all],
            Law::PiacMulti { partition, .. } => {
                let mut groups = vec![Vec::new(); partition.len()];
                for (pos, &i) in nodes.iter().enumerate() {
                    groups[partition.area_of(i)].push(pos);
                }
                groups
            }
            Law::Dai { .. } => all.iter().map(|&p| vec![p]).collect(),
            Law::PiacDecentralized { .. } => Vec::new(),
        };
        Ok(Self {
            law,
            nodes,
            costs,
            groups,
        })
    }

    pub fn piac(net: &Network, k: f64) -> Result<Self> {
        check_gain(k, "PIAC gain k")?;
        Self::build(net, Law::PiacSingle { k })
    }

    pub fn piac_multi(net: &Network, partition: AreaPartition, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != partition.len() {
            return Err(Error::Validation(format!(
                "expected {} area gains, got {}",
                partition.len(),
                gains.len()
            )));
        }
        for &k in &gains {
            check_gain(k, "area gain k_r")?;
        }
        let spec = Self::build(net, Law::PiacMulti { gains, partition })?;
        if let Law::PiacMulti { partition, .. } = &spec.law {
            for (r, group) in spec.groups.iter().enumerate() {
                if group.is_empty() {
                    return Err(Error::Validation(format!(
                        "area {} has no controller nodes",
                        partition.areas()[r].name
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// Node-local PIAC. Every machine and frequency-dependent node must
    /// host a controller and the network must have no passive nodes.
    pub fn piac_decentralized(net: &Network, k: f64, reference: Vec<f64>) -> Result<Self> {
        check_gain(k, "decentralized gain k")?;
        if net.n_passive() != 0 {
            return Err(Error::Validation(
                "decentralized PIAC requires a network without passive nodes".into(),
            ));
        }
        if net.controller_nodes().len() != net.n_dynamic() {
            return Err(Error::Validation(
                "decentralized PIAC requires a controller at every machine and frequency-dependent node"
                    .into(),
            ));
        }
        if reference.len() != net.n() {
            return Err(Error::Validation("reference angles must cover every node".into()));
        }
        let gains = vec![k; net.n_dynamic()];
        Self::build(net, Law::PiacDecentralized { gains, reference })
    }

    pub fn agc(net: &Network, k: f64, node: usize) -> Result<Self> {
        check_gain(k, "AGC gain k")?;
        if node >= net.n_dynamic() {
            return Err(Error::Validation(
                "AGC measurement node must be a machine or frequency-dependent node".into(),
            ));
        }
        Self::build(net, Law::Agc { k, node })
    }

    pub fn gather_broadcast(net: &Network, k: f64, weights: Vec<f64>) -> Result<Self> {
        check_gain(k, "GB gain k")?;
        if weights.len() != net.n_dynamic() {
            return Err(Error::Validation(format!(
                "GB needs {} weights, got {}",
                net.n_dynamic(),
                weights.len()
            )));
        }
        if weights.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::Validation("GB weights must lie in [0, 1]".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("GB weights must sum to 1 (sum = {sum})")));
        }
        Self::build(net, Law::GatherBroadcast { k, weights })
    }

    /// GB with C_i = 1/N over all machine and frequency-dependent nodes.
    pub fn gather_broadcast_uniform(net: &Network, k: f64) -> Result<Self> {
        let n = net.n_dynamic();
        Self::gather_broadcast(net, k, vec![1.0 / n as f64; n])
    }

    pub fn dai(net: &Network, gains: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n_k = net.controller_nodes().len();
        if gains.len() != n_k {
            return Err(Error::Validation(format!(
                "DAI needs {n_k} gains, got {}",
                gains.len()
            )));
        }
        for &k in &gains {
            check_gain(k, "DAI gain k_i")?;
        }
        let mut adj = vec![Vec::new(); n_k];
        for &(a, b, w) in &edges {
            if a >= n_k || b >= n_k || a == b {
                return Err(Error::Validation(format!("invalid DAI edge ({a}, {b})")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Validation("DAI weights must be positive".into()));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n_k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation("DAI communication graph is not connected".into()));
        }
        Self::build(net, Law::Dai { gains, edges })
    }

    /// DAI with uniform gain and a ring of weight `w` over the controllers.
    pub fn dai_ring(net: &Network, k: f64, w: f64) -> Result<Self> {
        let n_k = net.controller_nodes().len();
        let edges = match n_k {
            0 | 1 => Vec::new(),
            2 => vec![(0, 1, w)],
            _ => (0..n_k).map(|a| (a, (a + 1) % n_k, w)).collect(),
        };
        Self::dai(net, vec![k; n_k], edges)
    }

    /// Price groups: positions into `nodes` sharing one price.
    pub fn price_groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Length of the integrated internal state.
    pub fn internal_len(&self) -> usize {
        match &self.law {
            Law::PiacSingle { .. } | Law::Agc { .. } | Law::GatherBroadcast { .. } => 1,
            Law::PiacMulti { partition, .. } => partition.len(),
            Law::PiacDecentralized { .. } | Law::Dai { .. } => self.nodes.len(),
        }
    }

    /// True when the internal state holds integrals η, false when it holds prices λ.
    pub fn integrates_imbalance(&self) -> bool {
        matches!(
            self.law,
            Law::PiacSingle { .. } | Law::PiacMulti { .. } | Law::PiacDecentralized { .. }
        )
    }

    /// Smallest droop over the controller nodes.
    pub fn min_controller_droop(&self, net: &Network) -> f64 {
        self.nodes
            .iter()
            .map(|&i| net.node(i).droop)
            .fold(f64::INFINITY, f64::min)
    }

    /// Builds a full state from an internal state and current frequencies.
    pub fn state_from_internal(
        &self,
        net: &Network,
        internal: Vec<f64>,
        omega: &[f64],
    ) -> Result<ControllerState> {
        let mut state = ControllerState {
            internal,
            prices: Vec::new(),
            inputs: vec![0.0; net.n()],
            total: 0.0,
        };
        self.update_outputs(net, &mut state, omega)?;
        Ok(state)
    }

    /// Zero internal state (balanced pre-disturbance system).
    pub fn initial_state(&self, net: &Network) -> Result<ControllerState> {
        self.state_from_internal(net, vec![0.0; self.internal_len()], &vec![0.0; net.n()])
    }

    /// Recomputes prices, per-node inputs and the total input from the
    /// internal state. Only machine frequencies enter the outputs, so
    /// `omega` may hold stale values at frequency-dependent nodes.
    pub fn update_outputs(
        &self,
        net: &Network,
        state: &mut ControllerState,
        omega: &[f64],
    ) -> Result<()> {
        state.inputs.iter_mut().for_each(|u| *u = 0.0);
        state.prices.clear();
        let inertia_sum = |nodes: &mut dyn Iterator<Item = usize>| -> f64 {
            nodes
                .filter(|&i| i < net.n_machine())
                .map(|i| net.node(i).inertia * omega[i])
                .sum()
        };
        match &self.law {
            Law::PiacSingle { k } => {
                let total = -k * (state.internal[0] + inertia_sum(&mut (0..net.n_machine())));
                let r = clear(&self.costs, total)?;
                state.prices.push(r.price);
                for (&i, &u) in self.nodes.iter().zip(&r.inputs) {
                    state.inputs[i] = u;
                }
                state.total = total;
            }
            Law::PiacMulti { gains, partition } => {
                let mut total = 0.0;
                for (r, area) in partition.areas().iter().enumerate() {
                    let area_total =
                        -gains[r] * (state.internal[r] + inertia_sum(&mut area.nodes.iter().copied()));
                    let group = &self.groups[r];
                    let costs: Vec<_> = group.iter().map(|&p| self.costs[p]).collect();
                    let res = clear(&costs, area_total).map_err(|e| Error::Area {
                        area: area.name.clone(),
                        source: Box::new(e),
                    })?;
                    state.prices.push(res.price);
                    for (&p, &u) in group.iter().zip(&res.inputs) {
                        state.inputs[self.nodes[p]] = u;
                    }
                    total += area_total;
                }
                state.total = total;
            }
            Law::PiacDecentralized { gains, .. } => {
                let mut total = 0.0;
                for (p, &i) in self.nodes.iter().enumerate() {
                    let u = -gains[p] * (net.node(i).inertia * omega[i] + state.internal[p]);
                    state.inputs[i] = u;
                    total += u;
                }
                state.total = total;
            }
            Law::Agc { .. } | Law::GatherBroadcast { .. } => {
                let price = state.internal[0];
                state.prices.push(price);
                state.total = self.dispatch_prices(state, |_| price)?;
            }
            Law::Dai { .. } => {
                state.prices.extend_from_slice(&state.internal);
                let prices = state.internal.clone();
                state.total = self.dispatch_prices(state, |p| prices[p])?;
            }
        }
        Ok(())
    }

    fn dispatch_prices(&self, state: &mut ControllerState, price: impl Fn(usize) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for (p, (&i, cost)) in self.nodes.iter().zip(&self.costs).enumerate() {
            let u = cost.inverse_marginal(price(p))?;
            state.inputs[i] = u;
            total += u;
        }
        Ok(total)
    }

    /// Time derivative of the internal state given full measurements.
    pub fn internal_derivative(
        &self,
        net: &Network,
        state: &ControllerState,
        meas: &Measurements<'_>,
    ) -> Vec<f64> {
        let omega = meas.omega;
        let droop_sum = |nodes: &mut dyn Iterator<Item = usize>| -> f64 {
            nodes
                .filter(|&i| !net.is_passive(i))
                .map(|i| net.node(i).droop * omega[i])
                .sum()
        };
        match &self.law {
            Law::PiacSingle { .. } => vec![droop_sum(&mut (0..net.n_dynamic()))],
            Law::PiacMulti { partition, .. } => partition
                .areas()
                .iter()
                .enumerate()
                .map(|(r, area)| {
                    droop_sum(&mut area.nodes.iter().copied()) + partition.export(r, meas.theta)
                        - area.nominal_export
                })
                .collect(),
            Law::PiacDecentralized { reference, .. } => self
                .nodes
                .iter()
                .map(|&i| {
                    net.node(i).droop * omega[i] + net.outflow(i, meas.theta) - net.outflow(i, reference)
                })
                .collect(),
            Law::Agc { k, node } => vec![-k * omega[*node]],
            Law::GatherBroadcast { k, weights } => {
                let avg: f64 = weights.iter().zip(omega).map(|(c, w)| c * w).sum();
                vec![-k * avg]
            }
            Law::Dai { gains, edges } => {
                let prices = &state.internal;
                let mut consensus = vec![0.0; prices.len()];
                for &(a, b, w) in edges {
                    consensus[a] += w * (prices[b] - prices[a]);
                    consensus[b] += w * (prices[a] - prices[b]);
                }
                self.nodes
                    .iter()
                    .enumerate()
                    .map(|(p, &i)| gains[p] * (-omega[i] + consensus[p]))
                    .collect()
            }
        }
    }

    /// One forward-Euler controller update with the given measurements;
    /// outputs are evaluated at the new internal state with the same
    /// frequencies.
    pub fn step(
        &self,
        net: &Network,
        state: &ControllerState,
        meas: &Measurements<'_>,
        dt: f64,
    ) -> Result<ControllerState> {
        let deriv = self.internal_derivative(net, state, meas);
        let internal = state
            .internal
            .iter()
            .zip(&deriv)
            .map(|(x, d)| x + dt * d)
            .collect();
        self.state_from_internal(net, internal, meas.omega)
    }

    /// Marginal cost J'_i(u_i) at every controller node.
    pub fn marginal_costs(&self, state: &ControllerState) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .zip(&self.costs)
            .map(|(&i, c)| c.marginal(state.inputs[i]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    /// Integrated state: η values for PIAC laws, λ values for integral baselines.
    pub internal: Vec<f64>,
    /// Current prices λ (one per price group).
    pub prices: Vec<f64>,
    /// Per-node inputs u_i (zero off the controller set).
    pub inputs: Vec<f64>,
    /// u_s = Σ u_i.
    pub total: f64,
}

/// Frequencies at every node (zero at passive nodes) and angles.
#[derive(Debug, Clone, Copy)]
pub struct Measurements<'a> {
    pub omega: &'a [f64],
    pub theta: &'a [f64],
}

fn expect_law(spec: &ControllerSpec, name: &str) {
    assert_eq!(spec.law.name(), name, "controller spec does not hold the {name} law");
}

pub fn piac_single_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "piac");
    spec.step(net, state, meas, dt)
}

pub fn piac_multi_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "piac_multi");
    spec.step(net, state, meas, dt)
}

pub fn piac_decentralized_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "piac_decentralized");
    spec.step(net, state, meas, dt)
}

pub fn agc_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "agc");
    spec.step(net, state, meas, dt)
}

pub fn gb_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "gb");
    spec.step(net, state, meas, dt)
}

pub fn dai_step(
    spec: &ControllerSpec,
    net: &Network,
    state: &ControllerState,
    meas: &Measurements<'_>,
    dt: f64,
) -> Result<ControllerState> {
    expect_law(spec, "dai");
    spec.step(net, state, meas, dt)
}

/// Forward-Euler trace of the abstract frequency M_s ω̇_s = P_s − D_s ω_s + u_s.
/// `imbalance[n]` and `total[n]` are held constant over step n.
pub fn abstract_frequency_trace(
    inertia: f64,
    droop: f64,
    imbalance: &[f64],
    total: &[f64],
    dt: f64,
    omega0: f64,
) -> Vec<f64> {
    assert_eq!(imbalance.len(), total.len());
    let mut trace = Vec::with_capacity(total.len());
    let mut w = omega0;
    for (&p, &u) in imbalance.iter().zip(total) {
        trace.push(w);
        w += dt * (p - droop * w + u) / inertia;
    }
    trace
}
