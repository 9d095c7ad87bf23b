//! Network graph, node and line data, area partitions and case-file I/O.
//!
//! Nodes are stored in canonical order: machines first, then
//! frequency-dependent nodes, then passive nodes, each group ascending by
//! id. Every per-node vector in the crate uses this order, and the first
//! node (the first machine when one exists) is the angle reference.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    #[serde(rename = "machine")]
    Machine,
    #[serde(rename = "freq")]
    FreqDependent,
    #[serde(rename = "passive")]
    Passive,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Machine => "Machine",
            NodeKind::FreqDependent => "FreqDependent",
            NodeKind::Passive => "Passive",
        };
        f.write_str(s)
    }
}

/// Secondary controller installed at a node: quadratic cost weight and
/// input bounds (infinite when unbounded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerSite {
    pub alpha: f64,
    pub u_lo: f64,
    pub u_hi: f64,
}

impl ControllerSite {
    pub fn unbounded(alpha: f64) -> Self {
        Self {
            alpha,
            u_lo: f64::NEG_INFINITY,
            u_hi: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.u_lo.is_finite() || self.u_hi.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: u32,
    pub kind: NodeKind,
    /// Inertia M_i (machines only).
    pub inertia: f64,
    /// Droop D_i (zero for passive nodes).
    pub droop: f64,
    /// Injection P_i, p.u. on the system base; negative for demand.
    pub injection: f64,
    pub voltage: f64,
    pub controller: Option<ControllerSite>,
}

impl Node {
    pub fn machine(id: u32, inertia: f64, droop: f64, injection: f64) -> Self {
        Self {
            id,
            kind: NodeKind::Machine,
            inertia,
            droop,
            injection,
            voltage: 1.0,
            controller: None,
        }
    }

    pub fn freq(id: u32, droop: f64, injection: f64) -> Self {
        Self {
            id,
            kind: NodeKind::FreqDependent,
            inertia: 0.0,
            droop,
            injection,
            voltage: 1.0,
            controller: None,
        }
    }

    pub fn passive(id: u32, injection: f64) -> Self {
        Self {
            id,
            kind: NodeKind::Passive,
            inertia: 0.0,
            droop: 0.0,
            injection,
            voltage: 1.0,
            controller: None,
        }
    }

    pub fn with_controller(mut self, alpha: f64) -> Self {
        self.controller = Some(ControllerSite::unbounded(alpha));
        self
    }

    pub fn with_bounded_controller(mut self, alpha: f64, u_lo: f64, u_hi: f64) -> Self {
        self.controller = Some(ControllerSite { alpha, u_lo, u_hi });
        self
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Validation(format!("node {}: {msg}", self.id)));
        for (name, v) in [
            ("M", self.inertia),
            ("D", self.droop),
            ("P", self.injection),
            ("V", self.voltage),
        ] {
            if !v.is_finite() {
                return fail(&format!("{name} is not finite"));
            }
        }
        match self.kind {
            NodeKind::Machine => {
                if self.inertia <= 0.0 {
                    return fail("Machine node requires inertia M > 0");
                }
                if self.droop <= 0.0 {
                    return fail("Machine node requires droop D > 0");
                }
            }
            NodeKind::FreqDependent => {
                if self.droop <= 0.0 {
                    return fail("FreqDependent node requires droop D > 0");
                }
                if self.inertia != 0.0 {
                    return fail("FreqDependent node has nonzero inertia");
                }
            }
            NodeKind::Passive => {
                if self.droop != 0.0 {
                    return fail("Passive node has nonzero droop");
                }
                if self.inertia != 0.0 {
                    return fail("Passive node has nonzero inertia");
                }
                if self.controller.is_some() {
                    return fail("Passive node cannot host a secondary controller");
                }
            }
        }
        if let Some(c) = &self.controller {
            if !(c.alpha > 0.0 && c.alpha.is_finite()) {
                return fail("controller alpha must be positive and finite");
            }
            if c.u_lo.is_nan() || c.u_hi.is_nan() || c.u_lo > 0.0 || c.u_hi < 0.0 {
                return fail("controller bounds must satisfy u_lo <= 0 <= u_hi");
            }
        }
        Ok(())
    }
}

/// Undirected line between canonical node indices `from` and `to` with
/// effective susceptance B_ij = B̂_ij·V_i·V_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub susceptance: f64,
}

/// Line given by node ids, used when building a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSpec {
    pub from: u32,
    pub to: u32,
    pub susceptance: f64,
}

impl LineSpec {
    pub fn new(from: u32, to: u32, susceptance: f64) -> Self {
        Self {
            from,
            to,
            susceptance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaSpec {
    pub name: String,
    pub nodes: Vec<u32>,
    pub nominal_export: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Area {
    pub name: String,
    /// Canonical node indices, ascending.
    pub nodes: Vec<usize>,
    /// Nominal export P_ex*.
    pub nominal_export: f64,
}

/// A boundary line of an area. `sign` is +1 when the flow from `line.from`
/// to `line.to` leaves the area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLine {
    pub line: Line,
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaPartition {
    areas: Vec<Area>,
    node_area: Vec<usize>,
    boundaries: Vec<Vec<BoundaryLine>>,
}

impl AreaPartition {
    pub fn new(net: &Network, specs: &[AreaSpec]) -> Result<Self> {
        let n = net.n();
        let mut node_area = vec![usize::MAX; n];
        let mut areas = Vec::with_capacity(specs.len());
        if specs.is_empty() {
            return Err(Error::Validation("area partition has no areas".into()));
        }
        let mut names = BTreeSet::new();
        for (r, spec) in specs.iter().enumerate() {
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Validation(format!("duplicate area name `{}`", spec.name)));
            }
            if !spec.nominal_export.is_finite() {
                return Err(Error::Validation(format!(
                    "area {}: nominal export is not finite",
                    spec.name
                )));
            }
            let mut idx = Vec::with_capacity(spec.nodes.len());
            for &id in &spec.nodes {
                let i = net.index_of(id).ok_or_else(|| {
                    Error::Validation(format!("area {}: unknown node id {id}", spec.name))
                })?;
                if node_area[i] != usize::MAX {
                    return Err(Error::Validation(format!(
                        "areas are not disjoint: node {id} appears twice"
                    )));
                }
                node_area[i] = r;
                idx.push(i);
            }
            idx.sort_unstable();
            areas.push(Area {
                name: spec.name.clone(),
                nodes: idx,
                nominal_export: spec.nominal_export,
            });
        }
        if let Some(i) = node_area.iter().position(|&a| a == usize::MAX) {
            return Err(Error::Validation(format!(
                "areas do not cover node {}",
                net.nodes[i].id
            )));
        }
        let total: f64 = areas.iter().map(|a| a.nominal_export).sum();
        let scale = areas.iter().map(|a| a.nominal_export.abs()).sum::<f64>().max(1.0);
        if total.abs() > 1e-9 * scale {
            return Err(Error::Validation(format!(
                "nominal area exports must sum to zero (sum = {total:e})"
            )));
        }
        let mut boundaries = vec![Vec::new(); areas.len()];
        for line in &net.lines {
            let (a, b) = (node_area[line.from], node_area[line.to]);
            if a != b {
                boundaries[a].push(BoundaryLine {
                    line: *line,
                    sign: 1.0,
                });
                boundaries[b].push(BoundaryLine {
                    line: *line,
                    sign: -1.0,
                });
            }
        }
        Ok(Self {
            areas,
            node_area,
            boundaries,
        })
    }

    /// The whole network as one area with zero nominal export.
    pub fn single(net: &Network) -> Self {
        let spec = AreaSpec {
            name: "all".into(),
            nodes: net.nodes.iter().map(|n| n.id).collect(),
            nominal_export: 0.0,
        };
        Self::new(net, &[spec]).expect("single-area partition is always valid")
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn area_of(&self, node: usize) -> usize {
        self.node_area[node]
    }

    pub fn boundary_lines(&self, area: usize) -> Result<&[BoundaryLine]> {
        self.boundaries
            .get(area)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownArea(area))
    }

    /// Net export P_ex of `area` at angles `theta`.
    pub fn export(&self, area: usize, theta: &[f64]) -> f64 {
        self.boundaries[area]
            .iter()
            .map(|b| b.sign * b.line.susceptance * (theta[b.line.from] - theta[b.line.to]).sin())
            .sum()
    }

    pub fn exports(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.areas.len()).map(|r| self.export(r, theta)).collect()
    }

    pub fn to_specs(&self, net: &Network) -> Vec<AreaSpec> {
        self.areas
            .iter()
            .map(|a| AreaSpec {
                name: a.name.clone(),
                nodes: a.nodes.iter().map(|&i| net.nodes[i].id).collect(),
                nominal_export: a.nominal_export,
            })
            .collect()
    }
}

/// Boundary lines of `area` with their export orientation.
pub fn boundary_lines(part: &AreaPartition, area: usize) -> Result<Vec<BoundaryLine>> {
    part.boundary_lines(area).map(<[_]>::to_vec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    /// Σ M_i over machines.
    pub inertia: f64,
    /// Σ D_i over machines and frequency-dependent nodes.
    pub droop: f64,
    /// Σ P_i over all nodes (the power imbalance).
    pub imbalance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    lines: Vec<Line>,
    adjacency: Vec<Vec<(usize, f64)>>,
    index: BTreeMap<u32, usize>,
    n_machine: usize,
    n_freq: usize,
    base_power: f64,
    base_frequency: f64,
    partition: Option<AreaPartition>,
}

impl Network {
    /// Builds and validates a network. Nodes may be given in any order.
    pub fn new(
        base_power: f64,
        base_frequency: f64,
        mut nodes: Vec<Node>,
        lines: &[LineSpec],
    ) -> Result<Self> {
        if !(base_power > 0.0 && base_frequency > 0.0) {
            return Err(Error::Validation("base power and frequency must be positive".into()));
        }
        if nodes.is_empty() {
            return Err(Error::Validation("network has no nodes".into()));
        }
        for node in &nodes {
            node.validate()?;
        }
        nodes.sort_by_key(|n| (n.kind, n.id));
        let mut index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(Error::Validation(format!("duplicate node id {}", node.id)));
            }
        }
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut canon = Vec::with_capacity(lines.len());
        for spec in lines {
            let i = *index.get(&spec.from).ok_or_else(|| {
                Error::Validation(format!("line ({}, {}): unknown endpoint {}", spec.from, spec.to, spec.from))
            })?;
            let j = *index.get(&spec.to).ok_or_else(|| {
                Error::Validation(format!("line ({}, {}): unknown endpoint {}", spec.from, spec.to, spec.to))
            })?;
            if i == j {
                return Err(Error::Validation(format!("self-loop at node {}", spec.from)));
            }
            if !(spec.susceptance > 0.0 && spec.susceptance.is_finite()) {
                return Err(Error::Validation(format!(
                    "line ({}, {}): susceptance must be positive",
                    spec.from, spec.to
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Validation(format!(
                    "duplicate line between {} and {}",
                    spec.from, spec.to
                )));
            }
            adjacency[i].push((j, spec.susceptance));
            adjacency[j].push((i, spec.susceptance));
            canon.push(Line {
                from: i,
                to: j,
                susceptance: spec.susceptance,
            });
        }
        let n_machine = nodes.iter().filter(|n| n.kind == NodeKind::Machine).count();
        let n_freq = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::FreqDependent)
            .count();
        let net = Self {
            nodes,
            lines: canon,
            adjacency,
            index,
            n_machine,
            n_freq,
            base_power,
            base_frequency,
            partition: None,
        };
        if !net.is_connected() {
            return Err(Error::Validation("network graph is not connected".into()));
        }
        if net.aggregate_constants().droop <= 0.0 {
            return Err(Error::Validation("total droop must be positive".into()));
        }
        Ok(net)
    }

    pub fn with_areas(mut self, specs: &[AreaSpec]) -> Result<Self> {
        self.partition = Some(AreaPartition::new(&self, specs)?);
        Ok(self)
    }

    fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.n()];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.adjacency[i] {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        visited.into_iter().all(|v| v)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_machine(&self) -> usize {
        self.n_machine
    }

    pub fn n_freq(&self) -> usize {
        self.n_freq
    }

    pub fn n_passive(&self) -> usize {
        self.n() - self.n_machine - self.n_freq
    }

    /// Number of nodes with frequency dynamics (machines and
    /// frequency-dependent nodes); these occupy indices `0..n_dynamic()`.
    pub fn n_dynamic(&self) -> usize {
        self.n_machine + self.n_freq
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn base_power(&self) -> f64 {
        self.base_power
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn partition(&self) -> Option<&AreaPartition> {
        self.partition.as_ref()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn require_index(&self, id: u32) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    /// Angle reference: the first node in canonical order.
    pub fn reference(&self) -> usize {
        0
    }

    pub fn is_passive(&self, i: usize) -> bool {
        i >= self.n_dynamic()
    }

    /// Canonical indices of nodes hosting a secondary controller.
    pub fn controller_nodes(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.nodes[i].controller.is_some())
            .collect()
    }

    pub fn injections(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.injection).collect()
    }

    pub fn aggregate_constants(&self) -> Aggregates {
        let mut agg = Aggregates {
            inertia: 0.0,
            droop: 0.0,
            imbalance: 0.0,
        };
        for node in &self.nodes {
            if node.kind == NodeKind::Machine {
                agg.inertia += node.inertia;
            }
            agg.droop += node.droop;
            agg.imbalance += node.injection;
        }
        agg
    }

    /// Σ_j B_ij sin(θ_i − θ_j): the power leaving node `i` over its lines.
    pub fn outflow(&self, i: usize, theta: &[f64]) -> f64 {
        self.adjacency[i]
            .iter()
            .map(|&(j, b)| b * (theta[i] - theta[j]).sin())
            .sum()
    }

    pub fn outflows(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.outflow(i, theta)).collect()
    }

    /// Flow on `line` from `line.from` to `line.to`.
    pub fn line_flow(&self, line: &Line, theta: &[f64]) -> f64 {
        line.susceptance * (theta[line.from] - theta[line.to]).sin()
    }

    /// Copy of the network with node injections replaced.
    pub fn with_injections(&self, injections: &[f64]) -> Self {
        assert_eq!(injections.len(), self.n());
        let mut net = self.clone();
        for (node, &p) in net.nodes.iter_mut().zip(injections) {
            node.injection = p;
        }
        net
    }

    /// Copy of the network with the injection at canonical index `i` changed by `dp`.
    pub fn with_injection_change(&self, i: usize, dp: f64) -> Self {
        let mut p = self.injections();
        p[i] += dp;
        self.with_injections(&p)
    }

    /// Copy of the network whose controller cost weights are replaced, in
    /// the order of [`Network::controller_nodes`].
    pub fn with_alphas(&self, alphas: &[f64]) -> Result<Self> {
        let ctrl = self.controller_nodes();
        if alphas.len() != ctrl.len() {
            return Err(Error::Validation(format!(
                "expected {} cost weights, got {}",
                ctrl.len(),
                alphas.len()
            )));
        }
        let mut net = self.clone();
        for (&i, &a) in ctrl.iter().zip(alphas) {
            let site = net.nodes[i].controller.as_mut().expect("controller node");
            site.alpha = a;
            net.nodes[i].validate()?;
        }
        Ok(net)
    }

    /// Copy of the network in which every machine and frequency-dependent
    /// node hosts a controller (weights of existing controllers are kept).
    pub fn with_controllers_everywhere(&self) -> Self {
        let mut net = self.clone();
        for node in net.nodes.iter_mut() {
            if node.kind != NodeKind::Passive && node.controller.is_none() {
                node.controller = Some(ControllerSite::unbounded(1.0));
            }
        }
        net
    }

    pub fn to_case_json(&self) -> String {
        let file = CaseFile {
            base_mva: self.base_power,
            base_hz: self.base_frequency,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    kind: n.kind,
                    inertia: n.inertia,
                    droop: n.droop,
                    injection: n.injection,
                    voltage: n.voltage,
                    controller: n.controller.map(|c| ControllerRecord {
                        alpha: c.alpha,
                        u_lo: c.u_lo.is_finite().then_some(c.u_lo),
                        u_hi: c.u_hi.is_finite().then_some(c.u_hi),
                    }),
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    from: self.nodes[l.from].id,
                    to: self.nodes[l.to].id,
                    susceptance: l.susceptance,
                })
                .collect(),
            areas: self.partition.as_ref().map(|p| {
                p.to_specs(self)
                    .into_iter()
                    .map(|a| AreaRecord {
                        name: a.name,
                        nodes: a.nodes,
                        p_ex_nominal: a.nominal_export,
                    })
                    .collect()
            }),
        };
        serde_json::to_string_pretty(&file).expect("case serialization cannot fail")
    }

    pub fn from_case_str(text: &str, what: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: CaseFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            what: what.to_string(),
            context: format!("field `{}`: {}", e.path(), e.inner()),
        })?;
        file.into_network()
    }
}

/// Reads and validates a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Network::from_case_str(&text, &path.display().to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    base_mva: f64,
    base_hz: f64,
    nodes: Vec<NodeRecord>,
    lines: Vec<LineRecord>,
    #[serde(default)]
    areas: Option<Vec<AreaRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: u32,
    kind: NodeKind,
    #[serde(rename = "M", default)]
    inertia: f64,
    #[serde(rename = "D", default)]
    droop: f64,
    #[serde(rename = "P")]
    injection: f64,
    #[serde(rename = "V", default = "unit_voltage")]
    voltage: f64,
    #[serde(default)]
    controller: Option<ControllerRecord>,
}

fn unit_voltage() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerRecord {
    alpha: f64,
    #[serde(default)]
    u_lo: Option<f64>,
    #[serde(default)]
    u_hi: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    from: u32,
    to: u32,
    #[serde(rename = "B")]
    susceptance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AreaRecord {
    name: String,
    nodes: Vec<u32>,
    p_ex_nominal: f64,
}

impl CaseFile {
    fn into_network(self) -> Result<Network> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|r| Node {
                id: r.id,
                kind: r.kind,
                inertia: r.inertia,
                droop: r.droop,
                injection: r.injection,
                voltage: r.voltage,
                controller: r.controller.map(|c| ControllerSite {
                    alpha: c.alpha,
                    u_lo: c.u_lo.unwrap_or(f64::NEG_INFINITY),
                    u_hi: c.u_hi.unwrap_or(f64::INFINITY),
                }),
            })
            .collect();
        let lines: Vec<_> = self
            .lines
            .iter()
            .map(|l| LineSpec::new(l.from, l.to, l.susceptance))
            .collect();
        let net = Network::new(self.base_mva, self.base_hz, nodes, &lines)?;
        match self.areas {
            Some(areas) => {
                let specs: Vec<_> = areas
                    .into_iter()
                    .map(|a| AreaSpec {
                        name: a.name,
                        nodes: a.nodes,
                        nominal_export: a.p_ex_nominal,
                    })
                    .collect();
                net.with_areas(&specs)
            }
            None => Ok(net),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Machine(M=1, D=1, P=1) — FreqDependent(D=1, P=-1), B = 5; controller at the machine.
    pub fn two_node() -> Network {
        Network::new(
            100.0,
            60.0,
            vec![
                Node::machine(1, 1.0, 1.0, 1.0).with_controller(1.0),
                Node::freq(2, 1.0, -1.0),
            ],
            &[LineSpec::new(1, 2, 5.0)],
        )
        .unwrap()
    }

    pub fn triangle(b: f64) -> Network {
        Network::new(
            100.0,
            60.0,
            vec![
                Node::machine(1, 1.0, 1.0, 0.0).with_controller(1.0),
                Node::freq(2, 1.0, 0.0),
                Node::freq(3, 1.0, 0.0),
            ],
            &[
                LineSpec::new(1, 2, b),
                LineSpec::new(2, 3, b),
                LineSpec::new(1, 3, b),
            ],
        )
        .unwrap()
    }
}
