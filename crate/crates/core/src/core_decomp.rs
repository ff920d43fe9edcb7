//! k-core peeling on the positive layer and coreness maintenance.

use crate::dsu::Dsu;
use crate::graph::{Layer, NodeId, SignedGraph};

/// Coreness of every node on the positive layer. Dead nodes carry 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreState {
    coreness: Vec<u32>,
    cmax: u32,
}

impl CoreState {
    #[inline]
    pub fn coreness(&self, v: NodeId) -> u32 {
        self.coreness[v.index()]
    }

    pub fn values(&self) -> &[u32] {
        &self.coreness
    }

    /// Largest coreness over alive nodes, 0 on an empty graph.
    pub fn cmax(&self) -> u32 {
        self.cmax
    }
}

/// Alive nodes of the maximal subgraph whose positive minimum degree is at
/// least `k`, ascending. `k = 0` returns every alive node.
pub fn k_core(g: &SignedGraph, k: u32) -> Vec<NodeId> {
    let n = g.node_count();
    let mut deg: Vec<u32> = vec![0; n];
    let mut gone = vec![true; n];
    let mut stack = Vec::new();
    for v in g.alive_nodes() {
        deg[v.index()] = g.pos_deg(v);
        gone[v.index()] = false;
        if deg[v.index()] < k {
            gone[v.index()] = true;
            stack.push(v);
        }
    }
    while let Some(v) = stack.pop() {
        for w in g.pos_neighbors(v) {
            let i = w.index();
            if gone[i] {
                continue;
            }
            deg[i] -= 1;
            if deg[i] < k {
                gone[i] = true;
                stack.push(w);
            }
        }
    }
    (0..n).filter(|&i| !gone[i]).map(NodeId::new).collect()
}

/// Deletes every node outside the `p`-core and returns what was deleted.
pub fn p_core_subgraph(g: &mut SignedGraph, p: u32) -> Vec<NodeId> {
    let keep = k_core(g, p);
    let mut mark = vec![false; g.node_count()];
    for v in &keep {
        mark[v.index()] = true;
    }
    let drop: Vec<NodeId> = g.alive_nodes().filter(|v| !mark[v.index()]).collect();
    for &v in &drop {
        g.kill(v);
    }
    drop
}

/// Bucket peeling in O(V + E). Nodes of equal degree start in ascending id
/// order, which makes the processing order deterministic.
pub fn coreness_all(g: &SignedGraph) -> CoreState {
    let n = g.node_count();
    let mut deg = vec![0u32; n];
    let mut max_deg = 0u32;
    for v in g.alive_nodes() {
        let d = g.pos_deg(v);
        deg[v.index()] = d;
        max_deg = max_deg.max(d);
    }

    // counting sort of alive nodes by degree; stable, so ids stay ascending
    let mut bin = vec![0usize; max_deg as usize + 2];
    for v in g.alive_nodes() {
        bin[deg[v.index()] as usize + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let alive = g.alive_count();
    let mut vert = vec![NodeId(0); alive];
    let mut pos = vec![usize::MAX; n];
    {
        let mut next = bin.clone();
        for v in g.alive_nodes() {
            let d = deg[v.index()] as usize;
            pos[v.index()] = next[d];
            vert[next[d]] = v;
            next[d] += 1;
        }
    }
    // bin[d] now holds the start of bucket d
    bin.truncate(max_deg as usize + 1);

    let mut coreness = vec![0u32; n];
    for i in 0..alive {
        let v = vert[i];
        let dv = deg[v.index()];
        coreness[v.index()] = dv;
        for u in g.pos_neighbors(v) {
            let du = deg[u.index()];
            if du > dv {
                let pu = pos[u.index()];
                let pw = bin[du as usize];
                let w = vert[pw];
                if u != w {
                    vert.swap(pu, pw);
                    pos[u.index()] = pw;
                    pos[w.index()] = pu;
                }
                bin[du as usize] += 1;
                deg[u.index()] -= 1;
            }
        }
    }
    let cmax = coreness.iter().copied().max().unwrap_or(0);
    CoreState { coreness, cmax }
}

/// Brings `cs` up to date after `removed` were deleted from `g`.
///
/// Each deleted node is taken out edge by edge. For a deleted edge only
/// nodes of coreness `K = min(c[u], c[v])` connected to an endpoint through
/// coreness-`K` nodes can drop, and only to `K - 1`; those are found by
/// lazily peeling outward from the endpoints. The result equals
/// `coreness_all` on the post-deletion graph.
pub fn update_coreness(g: &SignedGraph, cs: CoreState, removed: &[NodeId]) -> CoreState {
    let mut m = Maintainer::new(g, cs.coreness, removed);
    for &x in removed {
        m.detach(x);
    }
    let coreness = m.core;
    let cmax = g
        .alive_nodes()
        .map(|v| coreness[v.index()])
        .max()
        .unwrap_or(0);
    CoreState { coreness, cmax }
}

struct Maintainer<'g> {
    g: &'g SignedGraph,
    core: Vec<u32>,
    // deleted but not yet detached
    pending: Vec<bool>,
    // neighbours of the node being detached whose shared edge is already cut
    cut: Vec<bool>,
    detaching: Option<NodeId>,
    epoch: u32,
    touched: Vec<u32>,
    cd: Vec<u32>,
    queue: Vec<NodeId>,
}

impl<'g> Maintainer<'g> {
    fn new(g: &'g SignedGraph, core: Vec<u32>, removed: &[NodeId]) -> Self {
        let n = g.node_count();
        let mut pending = vec![false; n];
        for v in removed {
            pending[v.index()] = true;
        }
        Maintainer {
            g,
            core,
            pending,
            cut: vec![false; n],
            detaching: None,
            epoch: 0,
            touched: vec![0; n],
            cd: vec![0; n],
            queue: Vec::new(),
        }
    }

    #[inline]
    fn present(&self, v: NodeId) -> bool {
        self.g.is_alive(v) || self.pending[v.index()]
    }

    fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let x = self.detaching;
        self.g
            .adjacency(Layer::Positive, v)
            .iter()
            .copied()
            .filter(move |&w| {
                self.present(w)
                    && !(Some(v) == x && self.cut[w.index()])
                    && !(Some(w) == x && self.cut[v.index()])
            })
    }

    fn count_support(&self, v: NodeId, k: u32) -> u32 {
        self.neighbors(v).filter(|w| self.core[w.index()] >= k).count() as u32
    }

    fn detach(&mut self, x: NodeId) {
        self.detaching = Some(x);
        let adj = self.g.adjacency(Layer::Positive, x);
        for &y in adj {
            if !self.present(y) {
                continue;
            }
            self.cut[y.index()] = true;
            self.drop_edge(x, y);
        }
        for &y in adj {
            self.cut[y.index()] = false;
        }
        self.detaching = None;
        self.pending[x.index()] = false;
        self.core[x.index()] = 0;
    }

    fn drop_edge(&mut self, u: NodeId, v: NodeId) {
        let k = self.core[u.index()].min(self.core[v.index()]);
        if k == 0 {
            return;
        }
        self.epoch += 1;
        self.queue.clear();
        for r in [u, v] {
            if self.core[r.index()] == k && self.touched[r.index()] != self.epoch {
                self.touched[r.index()] = self.epoch;
                let s = self.count_support(r, k);
                self.cd[r.index()] = s;
                if s < k {
                    self.queue.push(r);
                }
            }
        }
        while let Some(w) = self.queue.pop() {
            if self.core[w.index()] != k {
                continue;
            }
            self.core[w.index()] = k - 1;
            let nbrs: Vec<NodeId> = self.neighbors(w).collect();
            for z in nbrs {
                if self.core[z.index()] != k {
                    continue;
                }
                let zi = z.index();
                if self.touched[zi] != self.epoch {
                    self.touched[zi] = self.epoch;
                    self.cd[zi] = self.count_support(z, k);
                } else {
                    self.cd[zi] -= 1;
                }
                if self.cd[zi] < k {
                    self.queue.push(z);
                }
            }
        }
    }
}

/// Size and positive component count of one k-core.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CoreLevel {
    pub k: u32,
    pub nodes: usize,
    pub components: usize,
}

/// Levels `1..=cmax` in one descending union-find sweep.
pub fn core_profile(g: &SignedGraph, cs: &CoreState) -> Vec<CoreLevel> {
    let mut order: Vec<NodeId> = g.alive_nodes().filter(|&v| cs.coreness(v) > 0).collect();
    order.sort_unstable_by(|a, b| cs.coreness(*b).cmp(&cs.coreness(*a)).then(a.cmp(b)));
    let mut dsu = Dsu::with_len(g.node_count());
    let mut active = vec![false; g.node_count()];
    let mut levels = Vec::new();
    let (mut nodes, mut components) = (0usize, 0usize);
    let mut i = 0;
    for k in (1..=cs.cmax()).rev() {
        while i < order.len() && cs.coreness(order[i]) == k {
            let v = order[i];
            active[v.index()] = true;
            nodes += 1;
            components += 1;
            for w in g.pos_neighbors(v) {
                if !active[w.index()] {
                    continue;
                }
                let (a, b) = (dsu.find(v.index()), dsu.find(w.index()));
                if a != b {
                    dsu.link_roots(a, b);
                    components -= 1;
                }
            }
            i += 1;
        }
        levels.push(CoreLevel { k, nodes, components });
    }
    levels.reverse();
    levels
}
