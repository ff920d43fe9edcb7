//! Cascade (follower) computation under the positive degree constraint,
//! validity checks, and an exact solver for small instances.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedGraph};

/// Nodes that disappear when `seed` is deleted from a p-core graph: the
/// seed itself plus everything the positive constraint then peels away.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FollowerSet {
    seed: NodeId,
    members: Vec<NodeId>,
}

impl FollowerSet {
    pub fn seed(&self) -> NodeId {
        self.seed
    }

    /// Ascending, always contains the seed.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Scratch buffers for repeated follower computation on one graph. The
/// graph itself is never touched; liveness and degrees are simulated.
#[derive(Clone, Debug)]
pub struct FollowerEngine {
    epoch: u32,
    seen: Vec<u32>,
    gone: Vec<u32>,
    deg: Vec<u32>,
    stack: Vec<NodeId>,
}

impl FollowerEngine {
    pub fn new(node_count: usize) -> Self {
        FollowerEngine {
            epoch: 0,
            seen: vec![0; node_count],
            gone: vec![0; node_count],
            deg: vec![0; node_count],
            stack: Vec::new(),
        }
    }

    /// Checked entry point: `v` must be alive and `g` must have minimum
    /// positive degree at least `p`.
    pub fn compute(&mut self, g: &SignedGraph, p: u32, v: NodeId) -> Result<FollowerSet> {
        g.pos_degree(v)?;
        check_p_core(g, p)?;
        Ok(self.cascade(g, p, v))
    }

    fn next_epoch(&mut self, n: usize) {
        if self.seen.len() < n {
            self.seen.resize(n, 0);
            self.gone.resize(n, 0);
            self.deg.resize(n, 0);
        }
        if self.epoch == u32::MAX {
            self.seen.iter_mut().for_each(|x| *x = 0);
            self.gone.iter_mut().for_each(|x| *x = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Unchecked cascade; caller guarantees the preconditions.
    pub(crate) fn cascade(&mut self, g: &SignedGraph, p: u32, v: NodeId) -> FollowerSet {
        self.next_epoch(g.node_count());
        let e = self.epoch;
        let mut members = vec![v];
        self.gone[v.index()] = e;
        self.stack.clear();
        self.stack.push(v);
        while let Some(x) = self.stack.pop() {
            for w in g.pos_neighbors(x) {
                let i = w.index();
                if self.gone[i] == e {
                    continue;
                }
                if self.seen[i] != e {
                    self.seen[i] = e;
                    self.deg[i] = g.pos_deg(w);
                }
                self.deg[i] -= 1;
                if self.deg[i] < p {
                    self.gone[i] = e;
                    self.stack.push(w);
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        FollowerSet { seed: v, members }
    }
}

fn check_p_core(g: &SignedGraph, p: u32) -> Result<()> {
    match g.degree_summary().delta {
        Some(delta) if delta < p => Err(Error::NotPCore { p, delta }),
        _ => Ok(()),
    }
}

/// Followers of `v` in `g` with positive threshold `p`.
pub fn compute_followers(g: &SignedGraph, p: u32, v: NodeId) -> Result<FollowerSet> {
    FollowerEngine::new(g.node_count()).compute(g, p, v)
}

/// Deletes a follower set from both layers. Fails without mutating if any
/// member is already dead.
pub fn apply_followers(g: &mut SignedGraph, fs: &FollowerSet) -> Result<()> {
    if let Some(&v) = fs.members.iter().find(|v| !g.is_alive(**v)) {
        return Err(Error::StaleFollowers(v));
    }
    g.remove_nodes(&fs.members)
}

/// Whether every node of `set` has at least `p` positive and fewer than `n`
/// negative neighbours inside `set`. The empty set is valid; a set holding
/// a dead node is not.
pub fn is_valid_pncore(g: &SignedGraph, set: &[NodeId], p: u32, n: u32) -> bool {
    let mut inside = vec![false; g.node_count()];
    for &v in set {
        if !g.is_alive(v) {
            return false;
        }
        inside[v.index()] = true;
    }
    set.iter().all(|&v| {
        let pos = g.pos_neighbors(v).filter(|w| inside[w.index()]).count() as u32;
        let neg = g.neg_neighbors(v).filter(|w| inside[w.index()]).count() as u32;
        pos >= p && neg < n
    })
}

pub const ORACLE_NODE_CAP: usize = 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSolution {
    pub max_size: usize,
    /// Every distinct maximum node set, each ascending, in lexicographic order.
    pub solutions: Vec<Vec<NodeId>>,
}

/// Exact maximum (p,n)-cores by branch and bound over node subsets.
///
/// Every candidate set is first peeled to its internal p-core. If a node
/// still has `n` or more negative neighbours, the search splits into
/// "drop it" and "keep it", where keeping it forces out one of its
/// not-yet-kept negative neighbours (the i-th branch keeps the first i-1).
/// Every valid set survives its own peeling, so no maximum is lost.
pub fn oracle_max_pncore(g: &SignedGraph, p: u32, n: u32) -> Result<OracleSolution> {
    let nodes: Vec<NodeId> = g.alive_nodes().collect();
    if nodes.len() > ORACLE_NODE_CAP {
        return Err(Error::OracleCap {
            nodes: nodes.len(),
            cap: ORACLE_NODE_CAP,
        });
    }
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, v) in nodes.iter().enumerate() {
        local[v.index()] = i;
    }
    let mask_of = |it: &mut dyn Iterator<Item = NodeId>| -> u32 {
        it.fold(0u32, |m, w| m | 1 << local[w.index()])
    };
    let pos: Vec<u32> = nodes
        .iter()
        .map(|&v| mask_of(&mut g.pos_neighbors(v)))
        .collect();
    let neg: Vec<u32> = nodes
        .iter()
        .map(|&v| mask_of(&mut g.neg_neighbors(v)))
        .collect();

    let mut search = Search {
        pos,
        neg,
        p,
        n,
        best: 0,
        found: BTreeSet::new(),
    };
    let all = if nodes.is_empty() {
        0
    } else {
        u32::MAX >> (32 - nodes.len())
    };
    search.run(all, 0);

    let mut solutions: Vec<Vec<NodeId>> = search
        .found
        .iter()
        .map(|&m| {
            (0..nodes.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| nodes[i])
                .collect()
        })
        .collect();
    solutions.sort();
    if solutions.is_empty() {
        solutions.push(Vec::new());
    }
    Ok(OracleSolution {
        max_size: search.best as usize,
        solutions,
    })
}

struct Search {
    pos: Vec<u32>,
    neg: Vec<u32>,
    p: u32,
    n: u32,
    best: u32,
    found: BTreeSet<u32>,
}

impl Search {
    fn peel(&self, mut set: u32) -> u32 {
        loop {
            let mut next = set;
            let mut bits = set;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if (self.pos[i] & next).count_ones() < self.p {
                    next &= !(1 << i);
                }
            }
            if next == set {
                return set;
            }
            set = next;
        }
    }

    fn run(&mut self, set: u32, required: u32) {
        let set = self.peel(set);
        if required & !set != 0 {
            return;
        }
        let size = set.count_ones();
        if size < self.best || (size == 0 && !self.found.is_empty()) {
            return;
        }
        let mut worst: Option<(u32, usize)> = None;
        let mut bits = set;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let d = (self.neg[i] & set).count_ones();
            if d >= self.n && worst.is_none_or(|(wd, _)| d > wd) {
                worst = Some((d, i));
            }
        }
        let Some((deg, i)) = worst else {
            if size > self.best {
                self.best = size;
                self.found.clear();
            }
            self.found.insert(set);
            return;
        };
        let bit = 1u32 << i;
        if required & bit == 0 {
            self.run(set & !bit, required);
        }
        let free = self.neg[i] & set & !required;
        if free.count_ones() < deg - self.n + 1 {
            return;
        }
        let mut keep = required | bit;
        let mut bits = free;
        while bits != 0 {
            let j = bits.trailing_zeros();
            bits &= bits - 1;
            self.run(set & !(1 << j), keep);
            keep |= 1 << j;
        }
    }
}
