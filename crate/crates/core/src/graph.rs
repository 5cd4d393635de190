//! Directed relation graph and frame-shift accounting.
//!
//! Nodes are the assets plus the scene node `s`. Each relation adds an edge
//! from its reference (the relation target, or `s` for wall, corner and
//! placement relations) to the constrained asset. Unit endpoints resolve to
//! the unit's anchor. Parallel edges are collapsed for path metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::scene::{Endpoint, SceneSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {to} is unreachable from node {from}")]
    Unreachable { from: usize, to: usize },
    #[error("path cost needs two distinct nodes, got {0} twice")]
    SameNode(usize),
    #[error("node {0} out of range")]
    NoSuchNode(usize),
}

#[derive(Clone, Debug)]
pub struct RelationGraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl RelationGraph {
    /// Graph over `n` asset nodes plus the scene node (index `n`).
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let labels = (0..n)
            .map(|i| format!("n{i}"))
            .chain(["s".to_string()])
            .collect();
        Self::with_labels(labels, edges)
    }

    fn with_labels(labels: Vec<String>, edges: Vec<(usize, usize)>) -> Self {
        let mut sets = vec![BTreeSet::new(); labels.len()];
        for &(u, v) in &edges {
            sets[u].insert(v);
        }
        let adjacency = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Self {
            labels,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn scene_node(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Raw edge list, one entry per relation edge.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Collapsed successor list.
    pub fn successors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// BFS hop distances from `from`, skipping `blocked` nodes.
    pub fn distances_avoiding(&self, from: usize, blocked: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have a distance");
            for &v in &self.adjacency[u] {
                if Some(v) == blocked || dist[v].is_some() {
                    continue;
                }
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
        dist
    }

    pub fn distances_from(&self, from: usize) -> Vec<Option<usize>> {
        self.distances_avoiding(from, None)
    }
}

/// Builds the relation graph of a scene.
pub fn build_graph(spec: &SceneSpec) -> RelationGraph {
    let n = spec.assets.len();
    let node = |e: Endpoint| match e {
        Endpoint::Asset(i) => i,
        Endpoint::Unit(k) => spec.unit_assets(k).0,
        Endpoint::Scene => n,
    };
    let mut edges = Vec::new();
    for r in 0..spec.relations.len() {
        let (sources, target) = spec.endpoints(r);
        for &s in sources {
            edges.push((node(target), node(s)));
        }
    }
    let labels = spec
        .assets
        .iter()
        .map(|a| a.id.clone())
        .chain(["s".to_string()])
        .collect();
    RelationGraph::with_labels(labels, edges)
}

/// Minimum number of intermediate frame switches from `u` to `v`: shortest
/// directed path length minus one.
pub fn path_cost(g: &RelationGraph, u: usize, v: usize) -> Result<usize, GraphError> {
    for x in [u, v] {
        if x >= g.node_count() {
            return Err(GraphError::NoSuchNode(x));
        }
    }
    if u == v {
        return Err(GraphError::SameNode(u));
    }
    g.distances_from(u)[v]
        .map(|d| d - 1)
        .ok_or(GraphError::Unreachable { from: u, to: v })
}

/// Anchor and member node indices of one unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitNodes {
    pub name: String,
    pub anchor: usize,
    pub members: Vec<usize>,
}

impl UnitNodes {
    pub fn from_spec(spec: &SceneSpec) -> Vec<UnitNodes> {
        (0..spec.units.len())
            .map(|k| {
                let (anchor, members) = spec.unit_assets(k);
                UnitNodes {
                    name: spec.units[k].id.clone(),
                    anchor,
                    members: members.to_vec(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitStatus {
    Counted,
    /// The anchor does not separate the scene node from every member.
    NotCutVertex,
    NoMembers,
    /// Some member cannot be reached from the scene node.
    UnreachableMember,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSavings {
    pub name: String,
    pub members: usize,
    pub anchor_depth: Option<usize>,
    pub status: UnitStatus,
}

impl UnitSavings {
    /// `|M_k| * d(s, anchor)` for counted units.
    pub fn closed_form(&self) -> usize {
        match (self.status == UnitStatus::Counted, self.anchor_depth) {
            (true, Some(d)) => self.members * d,
            _ => 0,
        }
    }
}

/// Frame-shift costs with and without anchor-local reasoning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    /// `sum_v T*(s, v)` over assets reachable from `s`.
    pub cost: usize,
    /// Same sum with members of counted units measured from their anchor.
    pub cost_prime: usize,
    /// `cost - cost_prime`, from the two BFS sums.
    pub delta: usize,
    /// `sum_k |M_k| * d(s, anchor_k)` over counted units.
    pub closed_form: usize,
    pub units: Vec<UnitSavings>,
    /// Assets not reachable from the scene node; excluded from both sums.
    pub unreachable: Vec<usize>,
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "cost {}", self.cost).unwrap();
        writeln!(s, "cost_prime {}", self.cost_prime).unwrap();
        writeln!(s, "delta {}", self.delta).unwrap();
        writeln!(s, "closed_form {}", self.closed_form).unwrap();
        for u in &self.units {
            let depth = u.anchor_depth.map_or("-".to_string(), |d| d.to_string());
            writeln!(
                s,
                "unit {} members {} anchor_depth {} status {:?}",
                u.name, u.members, depth, u.status
            )
            .unwrap();
        }
        if !self.unreachable.is_empty() {
            writeln!(s, "unreachable {}", self.unreachable.len()).unwrap();
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("unit,members,anchor_depth,status,savings\n");
        for u in &self.units {
            let depth = u.anchor_depth.map_or(String::new(), |d| d.to_string());
            writeln!(
                s,
                "{},{},{},{:?},{}",
                u.name,
                u.members,
                depth,
                u.status,
                u.closed_form()
            )
            .unwrap();
        }
        writeln!(s, "total,,,,{}", self.delta).unwrap();
        s
    }
}

fn check_unit(g: &RelationGraph, from_s: &[Option<usize>], unit: &UnitNodes) -> UnitStatus {
    if unit.members.is_empty() {
        return UnitStatus::NoMembers;
    }
    if unit.members.iter().any(|&m| from_s[m].is_none()) {
        return UnitStatus::UnreachableMember;
    }
    let without_anchor = g.distances_avoiding(g.scene_node(), Some(unit.anchor));
    if unit.members.iter().any(|&m| without_anchor[m].is_some()) {
        return UnitStatus::NotCutVertex;
    }
    UnitStatus::Counted
}

/// Cost, Cost' and their difference for the given units. Units whose anchor
/// is not a cut vertex are reported and left out.
pub fn decomposition_savings(g: &RelationGraph, units: &[UnitNodes]) -> CostReport {
    let s = g.scene_node();
    let from_s = g.distances_from(s);
    let assets = 0..s;

    let cost: usize = assets
        .clone()
        .filter_map(|v| from_s[v])
        .map(|d| d - 1)
        .sum();
    let unreachable = assets.clone().filter(|&v| from_s[v].is_none()).collect();

    let mut reports = Vec::with_capacity(units.len());
    let mut local: BTreeMap<usize, usize> = BTreeMap::new();
    for unit in units {
        let status = check_unit(g, &from_s, unit);
        if status == UnitStatus::Counted {
            let from_anchor = g.distances_from(unit.anchor);
            for &m in &unit.members {
                let d = from_anchor[m].expect("members behind a cut vertex are reachable from it");
                local.insert(m, d - 1);
            }
        }
        reports.push(UnitSavings {
            name: unit.name.clone(),
            members: unit.members.len(),
            anchor_depth: from_s[unit.anchor],
            status,
        });
    }

    let cost_prime: usize = assets
        .filter_map(|v| match local.get(&v) {
            Some(&t) => Some(t),
            None => from_s[v].map(|d| d - 1),
        })
        .sum();
    let closed_form = reports.iter().map(UnitSavings::closed_form).sum();
    CostReport {
        cost,
        cost_prime,
        delta: cost - cost_prime,
        closed_form,
        units: reports,
        unreachable,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HopBucket {
    pub count: usize,
    pub flagged: usize,
}

impl HopBucket {
    pub fn rate_percent(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            100.0 * self.flagged as f64 / self.count as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HopHistogram {
    /// Keyed by hop count `d(s, asset)`.
    pub buckets: BTreeMap<usize, HopBucket>,
    pub unreachable: HopBucket,
}

/// Error rate of flagged assets grouped by hop count from the scene node.
pub fn hop_histogram(g: &RelationGraph, flagged: &BTreeSet<usize>) -> HopHistogram {
    let from_s = g.distances_from(g.scene_node());
    let mut h = HopHistogram::default();
    for v in 0..g.scene_node() {
        let bucket = match from_s[v] {
            Some(d) => h.buckets.entry(d).or_default(),
            None => &mut h.unreachable,
        };
        bucket.count += 1;
        if flagged.contains(&v) {
            bucket.flagged += 1;
        }
    }
    h
}
