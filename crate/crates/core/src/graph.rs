//! Two-layer signed graph over a dense node universe.
//!
//! Positive and negative edges live in separate adjacency lists. Node
//! deletion is logical: a liveness flag is cleared and the live degrees of
//! the neighbours are decremented, so delete-heavy loops never rebuild the
//! adjacency. `compact` produces a physically smaller copy when needed.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `0..node_count()`.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn new(index: usize) -> Self {
        NodeId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

/// Which adjacency layer a query runs on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Positive,
    Negative,
}

impl From<Sign> for Layer {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Positive => Layer::Positive,
            Sign::Negative => Layer::Negative,
        }
    }
}

/// Minimum positive degree and maximum negative degree over alive nodes.
/// Both are `None` when no node is alive.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DegreeSummary {
    pub delta: Option<u32>,
    pub gamma: Option<u32>,
}

/// Outcome of turning raw records into a graph. Every record lands in
/// exactly one of the three buckets.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub records: usize,
    pub accepted: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Collects labelled edges and assigns dense ids on `build`.
///
/// Labels are ordered numerically when they parse as integers, otherwise
/// lexicographically (numeric labels first), so the id assignment does not
/// depend on record order.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: BTreeSet<LabelKey>,
    edges: Vec<(String, String, Sign)>,
    self_loops: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum LabelKey {
    Numeric(i128, String),
    Text(String),
}

impl LabelKey {
    fn new(label: &str) -> Self {
        match label.parse::<i128>() {
            Ok(v) => LabelKey::Numeric(v, label.to_string()),
            Err(_) => LabelKey::Text(label.to_string()),
        }
    }

    fn into_label(self) -> String {
        match self {
            LabelKey::Numeric(_, s) | LabelKey::Text(s) => s,
        }
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node even if it never appears in an accepted edge.
    pub fn add_node(&mut self, label: &str) {
        self.labels.insert(LabelKey::new(label));
    }

    pub fn add_edge(&mut self, u: &str, v: &str, sign: Sign) {
        if u == v {
            self.self_loops += 1;
            return;
        }
        self.labels.insert(LabelKey::new(u));
        self.labels.insert(LabelKey::new(v));
        self.edges.push((u.to_string(), v.to_string(), sign));
    }

    pub fn build(self) -> (SignedGraph, BuildReport) {
        let labels: Vec<String> = self.labels.into_iter().map(LabelKey::into_label).collect();
        let index: HashMap<String, NodeId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId::new(i)))
            .collect();
        let dense: Vec<(u32, u32, Sign)> = self
            .edges
            .iter()
            .map(|(u, v, s)| (index[u].0, index[v].0, *s))
            .collect();
        let (g, mut report) = SignedGraph::assemble(labels, index, &dense);
        report.records += self.self_loops;
        report.self_loops += self.self_loops;
        (g, report)
    }
}

#[derive(Clone, Debug)]
pub struct SignedGraph {
    pos_adj: Vec<Vec<NodeId>>,
    neg_adj: Vec<Vec<NodeId>>,
    alive: Vec<bool>,
    alive_count: usize,
    pos_deg: Vec<u32>,
    neg_deg: Vec<u32>,
    pos_edges: usize,
    neg_edges: usize,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl SignedGraph {
    /// Builds a graph over nodes `0..n` labelled by their decimal index.
    pub fn from_edges(n: usize, edges: &[(u32, u32, Sign)]) -> Result<(Self, BuildReport)> {
        if let Some(&(u, v, _)) = edges
            .iter()
            .find(|(u, v, _)| *u as usize >= n || *v as usize >= n)
        {
            let bad = if u as usize >= n { u } else { v };
            return Err(Error::NodeOutOfRange(NodeId(bad)));
        }
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId::new(i)))
            .collect();
        Ok(Self::assemble(labels, index, edges))
    }

    fn assemble(
        labels: Vec<String>,
        index: HashMap<String, NodeId>,
        edges: &[(u32, u32, Sign)],
    ) -> (Self, BuildReport) {
        let n = labels.len();
        let mut report = BuildReport {
            records: edges.len(),
            ..Default::default()
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &(u, v, s) in edges {
            if u == v {
                report.self_loops += 1;
                continue;
            }
            let pair = (u.min(v), u.max(v));
            match s {
                Sign::Positive => pos.push(pair),
                Sign::Negative => neg.push(pair),
            }
        }
        let raw = pos.len() + neg.len();
        let pos_adj = adjacency(n, &mut pos);
        let neg_adj = adjacency(n, &mut neg);
        report.accepted = pos.len() + neg.len();
        report.duplicates = raw - report.accepted;

        let pos_deg = pos_adj.iter().map(|a| a.len() as u32).collect();
        let neg_deg = neg_adj.iter().map(|a| a.len() as u32).collect();
        let g = SignedGraph {
            pos_adj,
            neg_adj,
            alive: vec![true; n],
            alive_count: n,
            pos_deg,
            neg_deg,
            pos_edges: pos.len(),
            neg_edges: neg.len(),
            labels,
            index,
        };
        (g, report)
    }

    /// Size of the node universe, dead nodes included.
    #[inline]
    pub fn node_count(&self) -> usize {
        self.alive.len()
    }

    #[inline]
    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    #[inline]
    pub fn is_alive(&self, v: NodeId) -> bool {
        self.alive.get(v.index()).copied().unwrap_or(false)
    }

    pub fn alive_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| NodeId::new(i))
    }

    /// Number of positive edges with both endpoints alive.
    pub fn pos_edge_count(&self) -> usize {
        self.pos_edges
    }

    pub fn neg_edge_count(&self) -> usize {
        self.neg_edges
    }

    pub fn edge_count(&self, layer: Layer) -> usize {
        match layer {
            Layer::Positive => self.pos_edges,
            Layer::Negative => self.neg_edges,
        }
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    fn check_alive(&self, v: NodeId) -> Result<()> {
        if v.index() >= self.node_count() {
            Err(Error::NodeOutOfRange(v))
        } else if !self.alive[v.index()] {
            Err(Error::DeadNode(v))
        } else {
            Ok(())
        }
    }

    pub fn pos_degree(&self, v: NodeId) -> Result<u32> {
        self.check_alive(v)?;
        Ok(self.pos_deg[v.index()])
    }

    pub fn neg_degree(&self, v: NodeId) -> Result<u32> {
        self.check_alive(v)?;
        Ok(self.neg_deg[v.index()])
    }

    pub fn degree(&self, layer: Layer, v: NodeId) -> Result<u32> {
        match layer {
            Layer::Positive => self.pos_degree(v),
            Layer::Negative => self.neg_degree(v),
        }
    }

    // Unchecked degree accessors for kernels that already know `v` is alive.
    #[inline]
    pub(crate) fn pos_deg(&self, v: NodeId) -> u32 {
        self.pos_deg[v.index()]
    }

    #[inline]
    pub(crate) fn neg_deg(&self, v: NodeId) -> u32 {
        self.neg_deg[v.index()]
    }

    /// Full adjacency of `v` in `layer`, dead neighbours included.
    #[inline]
    pub fn adjacency(&self, layer: Layer, v: NodeId) -> &[NodeId] {
        match layer {
            Layer::Positive => &self.pos_adj[v.index()],
            Layer::Negative => &self.neg_adj[v.index()],
        }
    }

    /// Alive neighbours of `v` in `layer`, ascending.
    pub fn neighbors(&self, layer: Layer, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency(layer, v)
            .iter()
            .copied()
            .filter(move |w| self.alive[w.index()])
    }

    #[inline]
    pub fn pos_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors(Layer::Positive, v)
    }

    #[inline]
    pub fn neg_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors(Layer::Negative, v)
    }

    /// Whether `u` and `v` are joined in `layer` (liveness ignored).
    pub fn has_edge(&self, layer: Layer, u: NodeId, v: NodeId) -> bool {
        u.index() < self.node_count()
            && self.adjacency(layer, u).binary_search(&v).is_ok()
    }

    /// Same labels, alive edges of both layers plus `extra`. Dead nodes
    /// come back as isolated nodes.
    pub(crate) fn with_extra_edges(&self, extra: &[(u32, u32, Sign)]) -> (SignedGraph, BuildReport) {
        let mut all: Vec<(u32, u32, Sign)> = self
            .edges(Layer::Positive)
            .map(|(u, v)| (u.0, v.0, Sign::Positive))
            .chain(self.edges(Layer::Negative).map(|(u, v)| (u.0, v.0, Sign::Negative)))
            .collect();
        all.extend_from_slice(extra);
        Self::assemble(self.labels.clone(), self.index.clone(), &all)
    }

    /// Alive edges of a layer as `(u, v)` with `u < v`.
    pub fn edges(&self, layer: Layer) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.alive_nodes().flat_map(move |u| {
            self.neighbors(layer, u)
                .filter(move |w| *w > u)
                .map(move |w| (u, w))
        })
    }

    /// Marks every node of `nodes` dead in both layers. Validation happens
    /// before any mutation, so on error the graph is unchanged.
    pub fn remove_nodes(&mut self, nodes: &[NodeId]) -> Result<()> {
        for &v in nodes {
            self.check_alive(v)?;
        }
        if nodes.len() > 1 {
            let mut sorted = nodes.to_vec();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateRemoval(w[0]));
            }
        }
        for &v in nodes {
            self.kill(v);
        }
        Ok(())
    }

    /// Unchecked single-node deletion; `v` must be alive.
    pub(crate) fn kill(&mut self, v: NodeId) {
        debug_assert!(self.alive[v.index()]);
        self.alive[v.index()] = false;
        self.alive_count -= 1;
        for &w in &self.pos_adj[v.index()] {
            if self.alive[w.index()] {
                self.pos_deg[w.index()] -= 1;
                self.pos_edges -= 1;
            }
        }
        for &w in &self.neg_adj[v.index()] {
            if self.alive[w.index()] {
                self.neg_deg[w.index()] -= 1;
                self.neg_edges -= 1;
            }
        }
    }

    pub fn degree_summary(&self) -> DegreeSummary {
        let delta = self.alive_nodes().map(|v| self.pos_deg(v)).min();
        let gamma = self.alive_nodes().map(|v| self.neg_deg(v)).max();
        DegreeSummary { delta, gamma }
    }

    /// Maximal connected groups of alive nodes under `layer` adjacency.
    /// Members are ascending and groups are ordered by their smallest member.
    pub fn connected_components(&self, layer: Layer) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in self.alive_nodes() {
            if seen[s.index()] {
                continue;
            }
            seen[s.index()] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for w in self.neighbors(layer, u) {
                    if !seen[w.index()] {
                        seen[w.index()] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Copy of this graph in which only `keep` stays alive.
    pub fn restricted_to(&self, keep: &[NodeId]) -> Result<SignedGraph> {
        let mut mark = vec![false; self.node_count()];
        for &v in keep {
            self.check_alive(v)?;
            mark[v.index()] = true;
        }
        let drop: Vec<NodeId> = self.alive_nodes().filter(|v| !mark[v.index()]).collect();
        let mut g = self.clone();
        for v in drop {
            g.kill(v);
        }
        Ok(g)
    }

    /// Physically drops dead nodes. Returns the new graph together with the
    /// old id of every new node.
    pub fn compact(&self) -> (SignedGraph, Vec<NodeId>) {
        let old: Vec<NodeId> = self.alive_nodes().collect();
        let mut remap = vec![u32::MAX; self.node_count()];
        for (i, v) in old.iter().enumerate() {
            remap[v.index()] = i as u32;
        }
        let relabel = |adj: &Vec<Vec<NodeId>>| -> Vec<Vec<NodeId>> {
            old.iter()
                .map(|v| {
                    adj[v.index()]
                        .iter()
                        .filter(|w| remap[w.index()] != u32::MAX)
                        .map(|w| NodeId(remap[w.index()]))
                        .collect()
                })
                .collect()
        };
        let pos_adj = relabel(&self.pos_adj);
        let neg_adj = relabel(&self.neg_adj);
        let labels: Vec<String> = old.iter().map(|v| self.labels[v.index()].clone()).collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId::new(i)))
            .collect();
        let g = SignedGraph {
            pos_deg: pos_adj.iter().map(|a| a.len() as u32).collect(),
            neg_deg: neg_adj.iter().map(|a| a.len() as u32).collect(),
            pos_adj,
            neg_adj,
            alive: vec![true; old.len()],
            alive_count: old.len(),
            pos_edges: self.pos_edges,
            neg_edges: self.neg_edges,
            labels,
            index,
        };
        (g, old)
    }
}

fn adjacency(n: usize, pairs: &mut Vec<(u32, u32)>) -> Vec<Vec<NodeId>> {
    pairs.sort_unstable();
    pairs.dedup();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in pairs.iter() {
        adj[u as usize].push(NodeId(v));
        adj[v as usize].push(NodeId(u));
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}
