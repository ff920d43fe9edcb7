//! The three greedy (p,n)-core heuristics, disgruntlement scoring,
//! candidate pruning and community search.
//!
//! All three start from the p-core of the input and, while some node still
//! has `n` or more negative neighbours, delete one follower set. They differ
//! in how the seed of that set is chosen:
//!
//! * `fba` takes the smallest follower set among key nodes and their
//!   negative neighbours;
//! * `dfba` maximises `D(v) / |F(v)|`, computing followers only for nodes
//!   that survive bound-based pruning;
//! * `fca` maximises `D(v) / F̃(v)` where `F̃` is an r-hop ball estimate, and
//!   computes exact followers only for the chosen node.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{build_cctree, build_vd_index, refresh_after_removal};
use crate::core_decomp::{coreness_all, p_core_subgraph, update_coreness};
use crate::error::{Error, Result};
use crate::followers::{is_valid_pncore, FollowerEngine};
use crate::graph::{NodeId, SignedGraph};
use crate::sketch::{self, BallCounter, DEFAULT_HASH_SEED, DEFAULT_HLL_BITS};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fba,
    Dfba,
    Fca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Fba, Algorithm::Dfba, Algorithm::Fca];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fba => "fba",
            Algorithm::Dfba => "dfba",
            Algorithm::Fca => "fca",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fba" => Ok(Algorithm::Fba),
            "dfba" => Ok(Algorithm::Dfba),
            "fca" => Ok(Algorithm::Fca),
            other => Err(Error::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub p: u32,
    pub n: u32,
    /// Ball radius for `fca`.
    pub radius: u32,
    pub hll_bits: u8,
    pub seed: u64,
    /// Wall-clock limit; the run stops between (or inside) iterations once
    /// it is exceeded and reports what is left.
    pub budget: Option<Duration>,
}

impl AlgoConfig {
    pub fn new(algorithm: Algorithm, p: u32, n: u32) -> Self {
        AlgoConfig {
            algorithm,
            p,
            n,
            radius: 2,
            hll_bits: DEFAULT_HLL_BITS,
            seed: 0,
            budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.radius == 0 {
            return Err(Error::InvalidConfig("radius must be at least 1".into()));
        }
        if !(sketch::MIN_HLL_BITS..=sketch::MAX_HLL_BITS).contains(&self.hll_bits) {
            return Err(Error::InvalidConfig(format!(
                "hll bits must be in {}..={}",
                sketch::MIN_HLL_BITS,
                sketch::MAX_HLL_BITS
            )));
        }
        Ok(())
    }

    fn hash_seed(&self) -> u64 {
        DEFAULT_HASH_SEED ^ self.seed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStat {
    /// Alive nodes when the iteration started.
    pub alive: usize,
    pub followers_computed: usize,
    pub removed: usize,
}

impl IterationStat {
    /// Share of alive nodes whose followers were computed.
    pub fn follower_ratio(&self) -> f64 {
        if self.alive == 0 {
            0.0
        } else {
            self.followers_computed as f64 / self.alive as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub p: u32,
    pub n: u32,
    pub radius: u32,
    /// Surviving nodes, ascending.
    pub result: Vec<NodeId>,
    pub iterations: usize,
    pub followers_computed: u64,
    pub per_iteration: Vec<IterationStat>,
    /// Exact ball recounts performed by `fca`.
    pub sketch_refreshes: u64,
    pub wall: Duration,
    pub valid: bool,
    pub timed_out: bool,
}

impl RunReport {
    fn start(cfg: &AlgoConfig) -> Self {
        RunReport {
            algorithm: cfg.algorithm,
            p: cfg.p,
            n: cfg.n,
            radius: cfg.radius,
            result: Vec::new(),
            iterations: 0,
            followers_computed: 0,
            per_iteration: Vec::new(),
            sketch_refreshes: 0,
            wall: Duration::ZERO,
            valid: false,
            timed_out: false,
        }
    }

    fn record(&mut self, alive: usize, computed: usize, removed: usize) {
        self.iterations += 1;
        self.followers_computed += computed as u64;
        self.per_iteration.push(IterationStat {
            alive,
            followers_computed: computed,
            removed,
        });
    }

    fn finish(mut self, g: &SignedGraph, clock: &Clock) -> Self {
        self.result = g.alive_nodes().collect();
        self.valid = is_valid_pncore(g, &self.result, self.p, self.n);
        self.wall = clock.start.elapsed();
        self
    }
}

struct Clock {
    start: Instant,
    budget: Option<Duration>,
}

impl Clock {
    fn new(budget: Option<Duration>) -> Self {
        Clock {
            start: Instant::now(),
            budget,
        }
    }

    fn expired(&self) -> bool {
        self.budget.is_some_and(|b| self.start.elapsed() > b)
    }
}

/// Per-node disgruntlement: `d_self` counts how far a key node is over the
/// negative limit, `d_neib` how many key nodes a deletion would relieve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disgruntlement {
    pub d_self: Vec<u32>,
    pub d_neib: Vec<u32>,
}

impl Disgruntlement {
    pub fn d(&self, v: NodeId) -> u32 {
        self.d_self[v.index()] + self.d_neib[v.index()]
    }

    pub fn len(&self) -> usize {
        self.d_self.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_self.is_empty()
    }
}

fn d_self_of(g: &SignedGraph, n: u32, v: NodeId) -> u32 {
    let k = g.neg_deg(v);
    if k >= n {
        k - n + 1
    } else {
        0
    }
}

fn d_of(g: &SignedGraph, n: u32, v: NodeId) -> u32 {
    d_self_of(g, n, v) + g.neg_neighbors(v).filter(|&w| g.neg_deg(w) >= n).count() as u32
}

/// Disgruntlement of every alive node; dead nodes score 0.
pub fn disgruntlement_all(g: &SignedGraph, n: u32) -> Disgruntlement {
    let len = g.node_count();
    let mut d_self = vec![0; len];
    let mut d_neib = vec![0; len];
    for v in g.alive_nodes() {
        if g.neg_deg(v) >= n {
            d_self[v.index()] = d_self_of(g, n, v);
            for w in g.neg_neighbors(v) {
                d_neib[w.index()] += 1;
            }
        }
    }
    Disgruntlement { d_self, d_neib }
}

/// Disgruntlement and key-node count kept current across deletions. Only
/// nodes within two negative hops of a deleted node are rescored.
struct DTracker {
    n: u32,
    d: Vec<u32>,
    key_count: usize,
    stamp: Vec<u32>,
    epoch: u32,
    hop1: Vec<(NodeId, bool)>,
    touched: Vec<NodeId>,
}

impl DTracker {
    fn new(g: &SignedGraph, n: u32) -> Self {
        let len = g.node_count();
        let dis = disgruntlement_all(g, n);
        DTracker {
            n,
            d: (0..len).map(|i| dis.d(NodeId::new(i))).collect(),
            key_count: g.alive_nodes().filter(|&v| g.neg_deg(v) >= n).count(),
            stamp: vec![0; len],
            epoch: 0,
            hop1: Vec::new(),
            touched: Vec::new(),
        }
    }

    fn d(&self, v: NodeId) -> u32 {
        self.d[v.index()]
    }

    /// Records the state around `gone`; call before deleting it.
    fn before_removal(&mut self, g: &SignedGraph, gone: &[NodeId]) {
        let n = self.n;
        self.epoch += 1;
        self.hop1.clear();
        for &x in gone {
            self.stamp[x.index()] = self.epoch;
        }
        for &x in gone {
            if g.neg_deg(x) >= n {
                self.key_count -= 1;
            }
            for w in g.neg_neighbors(x) {
                if self.stamp[w.index()] != self.epoch {
                    self.stamp[w.index()] = self.epoch;
                    self.hop1.push((w, g.neg_deg(w) >= n));
                }
            }
        }
    }

    /// Rescores after `gone` was deleted and returns the rescored nodes.
    fn after_removal(&mut self, g: &SignedGraph, gone: &[NodeId]) -> &[NodeId] {
        let n = self.n;
        for &x in gone {
            self.d[x.index()] = 0;
        }
        self.touched.clear();
        for &(w, was) in &self.hop1 {
            let is = g.neg_deg(w) >= n;
            if was && !is {
                self.key_count -= 1;
            }
            self.touched.push(w);
            if was != is {
                for u in g.neg_neighbors(w) {
                    if self.stamp[u.index()] != self.epoch {
                        self.stamp[u.index()] = self.epoch;
                        self.touched.push(u);
                    }
                }
            }
        }
        for &u in &self.touched {
            self.d[u.index()] = d_of(g, n, u);
        }
        #[cfg(test)]
        {
            for v in g.alive_nodes() {
                assert_eq!(self.d[v.index()], d_of(g, n, v));
            }
            assert_eq!(self.key_count, g.alive_nodes().filter(|&v| g.neg_deg(v) >= n).count());
        }
        &self.touched
    }
}

/// `a/b` against `c/d` for positive denominators.
#[inline]
fn cmp_ratio(a: u32, b: u32, c: u32, d: u32) -> Ordering {
    (a as u64 * d as u64).cmp(&(c as u64 * b as u64))
}

/// Nodes with `d > 0` whose optimistic score `d/lb` reaches the best
/// pessimistic score `max d/ub`. Any node maximising `d/|F|` is kept.
/// `lb` and `ub` are indexed by node id; ascending output.
pub fn select_candidates(d: &Disgruntlement, lb: &[u32], ub: &[u32]) -> Vec<NodeId> {
    let live: Vec<NodeId> = (0..d.len())
        .map(NodeId::new)
        .filter(|&v| d.d(v) > 0)
        .collect();
    let Some(theta) = live
        .iter()
        .copied()
        .max_by(|&a, &b| cmp_ratio(d.d(a), ub[a.index()], d.d(b), ub[b.index()]))
    else {
        return Vec::new();
    };
    let (tn, td) = (d.d(theta), ub[theta.index()]);
    live.into_iter()
        .filter(|&v| cmp_ratio(d.d(v), lb[v.index()], tn, td) != Ordering::Less)
        .collect()
}

fn has_violation(g: &SignedGraph, n: u32) -> bool {
    g.alive_nodes().any(|v| g.neg_deg(v) >= n)
}

/// Runs the configured algorithm on a copy of `g`.
pub fn run(g: &SignedGraph, cfg: &AlgoConfig) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Fba => fba(g, cfg),
        Algorithm::Dfba => dfba(g, cfg),
        Algorithm::Fca => fca(g, cfg),
    }
}

pub fn fba(g: &SignedGraph, cfg: &AlgoConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Clock::new(cfg.budget);
    let (p, n) = (cfg.p, cfg.n);
    let mut g = g.clone();
    p_core_subgraph(&mut g, p);
    let mut report = RunReport::start(cfg);
    let mut engine = FollowerEngine::new(g.node_count());
    let mut in_t = vec![false; g.node_count()];
    loop {
        if !has_violation(&g, n) {
            break;
        }
        if clock.expired() {
            report.timed_out = true;
            break;
        }
        let mut t = Vec::new();
        for s in g.alive_nodes().filter(|&s| g.neg_deg(s) >= n) {
            for x in std::iter::once(s).chain(g.neg_neighbors(s)) {
                if !in_t[x.index()] {
                    in_t[x.index()] = true;
                    t.push(x);
                }
            }
        }
        for x in &t {
            in_t[x.index()] = false;
        }
        t.sort_unstable();
        let graph = &g;
        let sizes: Vec<Option<usize>> = t
            .par_iter()
            .map_init(
                || FollowerEngine::new(graph.node_count()),
                |eng, &v| (!clock.expired()).then(|| eng.cascade(graph, p, v).size()),
            )
            .collect();
        let computed = sizes.iter().filter(|s| s.is_some()).count();
        if computed < t.len() {
            report.followers_computed += computed as u64;
            report.timed_out = true;
            break;
        }
        let best = t
            .iter()
            .zip(&sizes)
            .min_by_key(|(v, s)| (s.unwrap(), **v))
            .map(|(v, _)| *v)
            .expect("a violation implies a key node");
        let alive = g.alive_count();
        let fs = engine.cascade(&g, p, best);
        g.remove_nodes(fs.members())?;
        report.record(alive, computed, fs.size());
    }
    Ok(report.finish(&g, &clock))
}

pub fn dfba(g: &SignedGraph, cfg: &AlgoConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Clock::new(cfg.budget);
    let (p, n) = (cfg.p, cfg.n);
    let mut g = g.clone();
    p_core_subgraph(&mut g, p);
    let mut report = RunReport::start(cfg);
    let mut engine = FollowerEngine::new(g.node_count());
    let mut cs = coreness_all(&g);
    let mut tree = build_cctree(&g, &cs, p);
    let mut idx = build_vd_index(&g, &cs, p);
    let len = g.node_count();
    let mut dt = DTracker::new(&g, n);
    let mut lb = vec![0u32; len];
    let mut key: Vec<Option<Optimistic>> = vec![None; len];
    let mut order: BTreeSet<Optimistic> = BTreeSet::new();
    let set_key = |v: NodeId,
                   d: u32,
                   lb: u32,
                   key: &mut Vec<Option<Optimistic>>,
                   order: &mut BTreeSet<Optimistic>| {
        if let Some(old) = key[v.index()].take() {
            order.remove(&old);
        }
        if d > 0 {
            let k = Optimistic { d, lb, v };
            key[v.index()] = Some(k);
            order.insert(k);
        }
    };
    for v in g.alive_nodes() {
        lb[v.index()] = idx.lower_bound(&g, v);
        set_key(v, dt.d(v), lb[v.index()], &mut key, &mut order);
    }
    let mut stamp = vec![0u32; len];
    let mut epoch = 0;
    while dt.key_count > 0 {
        if clock.expired() {
            report.timed_out = true;
            break;
        }
        // theta = max d/UB bounds the best achievable score from below, so
        // only nodes with d/LB >= theta can win
        let mut theta: Option<(u32, u32)> = None;
        for k in &order {
            let ub = tree.upper_bound(k.v)?;
            if theta.is_none_or(|(tn, td)| cmp_ratio(k.d, ub, tn, td) == Ordering::Greater) {
                theta = Some((k.d, ub));
            }
        }
        let (tn, td) = theta.expect("a violation implies positive disgruntlement");
        // best optimistic score first, so evaluation can stop as soon as
        // no remaining candidate can beat the incumbent
        let mut best: Option<(u32, u32, NodeId)> = None;
        let mut computed = 0;
        for k in &order {
            if cmp_ratio(k.d, k.lb, tn, td) == Ordering::Less {
                break;
            }
            if let Some((bd, bf, _)) = best {
                if cmp_ratio(k.d, k.lb, bd, bf) == Ordering::Less {
                    break;
                }
            }
            let f = engine.cascade(&g, p, k.v).size() as u32;
            computed += 1;
            let better = match best {
                None => true,
                Some((bd, bf, bv)) => match cmp_ratio(k.d, f, bd, bf) {
                    Ordering::Greater => true,
                    Ordering::Equal => k.v < bv,
                    Ordering::Less => false,
                },
            };
            if better {
                best = Some((k.d, f, k.v));
            }
        }
        let (_, _, seed) = best.expect("theta's node is always a candidate");
        let alive = g.alive_count();
        let fs = engine.cascade(&g, p, seed);
        let gone = fs.members();
        dt.before_removal(&g, gone);
        g.remove_nodes(gone)?;
        let touched = dt.after_removal(&g, gone).to_vec();
        cs = update_coreness(&g, cs, gone);
        (tree, idx) = refresh_after_removal(tree, idx, &g, &cs, gone);
        for &x in gone {
            set_key(x, 0, 0, &mut key, &mut order);
        }
        epoch += 1;
        let mut rescore = touched;
        for &x in idx.changed() {
            for u in std::iter::once(x).chain(g.pos_neighbors(x)) {
                if g.is_alive(u) && stamp[u.index()] != epoch {
                    stamp[u.index()] = epoch;
                    lb[u.index()] = idx.lower_bound(&g, u);
                    rescore.push(u);
                }
            }
        }
        for u in rescore {
            set_key(u, dt.d(u), lb[u.index()], &mut key, &mut order);
        }
        #[cfg(test)]
        for v in g.alive_nodes() {
            assert_eq!(lb[v.index()], idx.lower_bound(&g, v));
            assert_eq!(key[v.index()].is_some(), dt.d(v) > 0);
        }
        report.record(alive, computed, fs.size());
    }
    Ok(report.finish(&g, &clock))
}

/// A DFBA candidate keyed by its optimistic score `d/lb`, best first, ties
/// by ascending id.
#[derive(Copy, Clone, Debug)]
struct Optimistic {
    d: u32,
    lb: u32,
    v: NodeId,
}

impl Ord for Optimistic {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_ratio(other.d, other.lb, self.d, self.lb).then(self.v.cmp(&other.v))
    }
}

impl PartialOrd for Optimistic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Optimistic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Optimistic {}

type Score = (Reverse<OrderedFloat<f64>>, NodeId);

pub fn fca(g: &SignedGraph, cfg: &AlgoConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Clock::new(cfg.budget);
    let (p, n, r) = (cfg.p, cfg.n, cfg.radius);
    let mut g = g.clone();
    p_core_subgraph(&mut g, p);
    let mut report = RunReport::start(cfg);
    let len = g.node_count();

    let mut dt = DTracker::new(&g, n);
    if dt.key_count == 0 {
        return Ok(report.finish(&g, &clock));
    }
    let mut ball = sketch::hyperanf_balls(&g, r, cfg.hll_bits, cfg.hash_seed())?.est;
    let mut score: Vec<Option<OrderedFloat<f64>>> = vec![None; len];
    let mut queue: BTreeSet<Score> = BTreeSet::new();
    let set_score = |v: NodeId,
                     d: &[u32],
                     ball: &[f64],
                     score: &mut Vec<Option<OrderedFloat<f64>>>,
                     queue: &mut BTreeSet<Score>| {
        if let Some(old) = score[v.index()].take() {
            queue.remove(&(Reverse(old), v));
        }
        let dv = d[v.index()];
        if dv > 0 {
            let s = OrderedFloat(dv as f64 / ball[v.index()].max(1.0));
            score[v.index()] = Some(s);
            queue.insert((Reverse(s), v));
        }
    };
    for v in g.alive_nodes() {
        set_score(v, &dt.d, &ball, &mut score, &mut queue);
    }

    let mut engine = FollowerEngine::new(len);
    let mut counter = BallCounter::new(len);
    let mut stamp = vec![0u32; len];
    let mut epoch = 0u32;
    let mut frontier = VecDeque::new();
    while dt.key_count > 0 {
        if clock.expired() {
            report.timed_out = true;
            break;
        }
        let &(_, seed) = queue.first().expect("a violation implies positive disgruntlement");
        let alive = g.alive_count();
        let fs = engine.cascade(&g, p, seed);
        let gone = fs.members();

        // nodes whose ball may shrink: within r positive hops of a deleted
        // node, measured before the deletion
        epoch += 1;
        for &x in gone {
            stamp[x.index()] = epoch;
            frontier.push_back((x, 0));
        }
        let mut near = Vec::new();
        while let Some((u, dist)) = frontier.pop_front() {
            if dist == r {
                continue;
            }
            for w in g.pos_neighbors(u) {
                if stamp[w.index()] != epoch {
                    stamp[w.index()] = epoch;
                    near.push(w);
                    frontier.push_back((w, dist + 1));
                }
            }
        }
        dt.before_removal(&g, gone);
        #[cfg(test)]
        let balls_before: Vec<usize> = (0..len)
            .map(|i| {
                let v = NodeId::new(i);
                if g.is_alive(v) {
                    counter.count(&g, v, r)
                } else {
                    0
                }
            })
            .collect();
        g.remove_nodes(gone)?;
        for &x in gone {
            if let Some(old) = score[x.index()].take() {
                queue.remove(&(Reverse(old), x));
            }
        }
        let touched = dt.after_removal(&g, gone).to_vec();
        for &u in &near {
            ball[u.index()] = counter.count(&g, u, r) as f64;
        }
        report.sketch_refreshes += near.len() as u64;
        #[cfg(test)]
        {
            let mut refreshed = vec![false; len];
            for &u in &near {
                refreshed[u.index()] = true;
            }
            for v in g.alive_nodes() {
                if counter.count(&g, v, r) != balls_before[v.index()] {
                    assert!(refreshed[v.index()]);
                }
            }
        }
        for &u in touched.iter().chain(&near) {
            set_score(u, &dt.d, &ball, &mut score, &mut queue);
        }
        report.record(alive, 1, gone.len());
    }
    Ok(report.finish(&g, &clock))
}

/// Nodes of the positive component of `result` that holds every query
/// node, or nothing when no single component does.
pub fn community_in(g: &SignedGraph, result: &[NodeId], query: &[NodeId]) -> Vec<NodeId> {
    let Some(&start) = query.first() else {
        return Vec::new();
    };
    let mut inside = vec![false; g.node_count()];
    for &v in result {
        inside[v.index()] = true;
    }
    if !query.iter().all(|q| q.index() < inside.len() && inside[q.index()]) {
        return Vec::new();
    }
    let mut seen = vec![false; g.node_count()];
    seen[start.index()] = true;
    let mut comp = vec![start];
    let mut i = 0;
    while i < comp.len() {
        let u = comp[i];
        i += 1;
        for &w in g.adjacency(crate::Layer::Positive, u) {
            if inside[w.index()] && !seen[w.index()] {
                seen[w.index()] = true;
                comp.push(w);
            }
        }
    }
    if query.iter().all(|q| seen[q.index()]) {
        comp.sort_unstable();
        comp
    } else {
        Vec::new()
    }
}

/// Runs `cfg.algorithm` and returns the community containing `query`.
pub fn community_search(
    g: &SignedGraph,
    cfg: &AlgoConfig,
    query: &[NodeId],
) -> Result<(RunReport, Vec<NodeId>)> {
    if query.is_empty() {
        return Err(Error::InvalidConfig("query set is empty".into()));
    }
    if let Some(&q) = query.iter().find(|q| q.index() >= g.node_count()) {
        return Err(Error::NodeOutOfRange(q));
    }
    let report = run(g, cfg)?;
    let comm = community_in(g, &report.result, query);
    Ok((report, comm))
}
