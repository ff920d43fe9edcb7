//! Follower-size bounds for a p-core graph.
//!
//! Lower bound: a node whose positive degree and coreness both equal `p`
//! (a VD-node) dies as soon as any positive neighbour is deleted, and so
//! does its whole connected group of VD-nodes (a VD-cc). Deleting `v`
//! therefore takes out every VD-cc adjacent to `v`.
//!
//! Upper bound: the core tree nests the connected components of the
//! p-core, (p+1)-core, ... Nodes of the (p+1)-core other than `v` keep at
//! least `p` neighbours after `v` goes, so only `v` and p-shell nodes of
//! `v`'s top-level component can follow it.

use std::collections::VecDeque;

use crate::core_decomp::CoreState;
use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedGraph};

const NONE: u32 = u32::MAX;

/// VD-nodes of a p-core graph and their connected components.
///
/// Component labels are arbitrary and may be reused after an update; a
/// retired label keeps size 0.
#[derive(Clone, Debug)]
pub struct VdIndex {
    p: u32,
    nodes: Vec<NodeId>,
    cc_of: Vec<u32>,
    cc_size: Vec<u32>,
    cc_members: Vec<Vec<NodeId>>,
    free: Vec<u32>,
    dirty: Vec<NodeId>,
}

/// Marks a node queued for labelling during an update.
const PENDING: u32 = u32::MAX - 1;

impl PartialEq for VdIndex {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.nodes == other.nodes && self.components() == other.components()
    }
}

impl Eq for VdIndex {}

impl VdIndex {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// VD-nodes, ascending.
    pub fn vd_nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn is_vd(&self, v: NodeId) -> bool {
        self.component(v).is_some()
    }

    /// Component label of a VD-node.
    pub fn component(&self, v: NodeId) -> Option<u32> {
        match self.cc_of.get(v.index()) {
            Some(&c) if c < PENDING => Some(c),
            _ => None,
        }
    }

    /// Sizes indexed by component label.
    pub fn component_sizes(&self) -> &[u32] {
        &self.cc_size
    }

    /// Every component as an ascending member list, sorted.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut out: Vec<Vec<NodeId>> = self
            .cc_members
            .iter()
            .filter(|m| !m.is_empty())
            .map(|m| {
                let mut m = m.clone();
                m.sort_unstable();
                m
            })
            .collect();
        out.sort();
        out
    }

    /// Nodes whose component changed in the last update, dead ones
    /// included. A lower bound can only have changed for these nodes and
    /// their neighbours.
    pub fn changed(&self) -> &[NodeId] {
        &self.dirty
    }

    /// `1 + Σ |VD-cc|` over the distinct VD-ccs adjacent to `v`. When `v`
    /// is itself a VD-node its own component already counts `v`, so the
    /// leading 1 is dropped.
    pub fn lower_bound(&self, g: &SignedGraph, v: NodeId) -> u32 {
        let own = self.component(v);
        let mut seen = [0u32; 16];
        let mut len = 0;
        let mut spill: Vec<u32> = Vec::new();
        let mut sum = 0;
        for c in own.into_iter().chain(g.pos_neighbors(v).filter_map(|w| self.component(w))) {
            if seen[..len].contains(&c) || spill.contains(&c) {
                continue;
            }
            if len < seen.len() {
                seen[len] = c;
                len += 1;
            } else {
                spill.push(c);
            }
            sum += self.cc_size[c as usize];
        }
        if own.is_some() {
            sum
        } else {
            sum + 1
        }
    }

    fn vd_now(&self, g: &SignedGraph, cs: &CoreState, v: NodeId) -> bool {
        g.is_alive(v) && g.pos_deg(v) == self.p && cs.coreness(v) == self.p
    }

    fn retire(&mut self, c: u32, pending: &mut Vec<NodeId>, g: &SignedGraph, cs: &CoreState) {
        for v in std::mem::take(&mut self.cc_members[c as usize]) {
            self.dirty.push(v);
            if self.vd_now(g, cs, v) {
                self.cc_of[v.index()] = PENDING;
                pending.push(v);
            } else {
                self.cc_of[v.index()] = NONE;
            }
        }
        self.cc_size[c as usize] = 0;
        self.free.push(c);
    }

    /// Brings the index up to date after `removed` left `g`. VD status can
    /// only change at removed nodes and their neighbours, so only the
    /// components around them are relabelled.
    fn update(&mut self, g: &SignedGraph, cs: &CoreState, removed: &[NodeId]) {
        self.dirty.clear();
        if self.cc_of.len() < g.node_count() {
            self.cc_of.resize(g.node_count(), NONE);
        }
        let mut pending = Vec::new();
        for &x in removed {
            for v in std::iter::once(x).chain(g.pos_neighbors(x)) {
                if let Some(c) = self.component(v) {
                    self.retire(c, &mut pending, g, cs);
                }
                if self.cc_of[v.index()] == NONE && self.vd_now(g, cs, v) {
                    self.cc_of[v.index()] = PENDING;
                    self.dirty.push(v);
                    pending.push(v);
                }
            }
        }
        let mut queue = VecDeque::new();
        let mut i = 0;
        while i < pending.len() {
            let s = pending[i];
            i += 1;
            if self.cc_of[s.index()] != PENDING {
                continue;
            }
            let label = self.free.pop().unwrap_or_else(|| {
                self.cc_size.push(0);
                self.cc_members.push(Vec::new());
                self.cc_size.len() as u32 - 1
            });
            self.cc_of[s.index()] = label;
            queue.push_back(s);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for w in g.pos_neighbors(u) {
                    match self.cc_of[w.index()] {
                        NONE => {}
                        PENDING => {
                            self.cc_of[w.index()] = label;
                            queue.push_back(w);
                        }
                        c if c != label => {
                            // an untouched component reached through a new VD-node
                            self.retire(c, &mut pending, g, cs);
                            self.cc_of[w.index()] = label;
                            queue.push_back(w);
                        }
                        _ => {}
                    }
                }
            }
            self.dirty.extend_from_slice(&members);
            self.cc_size[label as usize] = members.len() as u32;
            self.cc_members[label as usize] = members;
        }
        if !self.dirty.is_empty() {
            self.dirty.sort_unstable();
            self.dirty.dedup();
            let mut gained: Vec<NodeId> = self
                .dirty
                .iter()
                .copied()
                .filter(|&v| self.is_vd(v) && self.nodes.binary_search(&v).is_err())
                .collect();
            let cc_of = &self.cc_of;
            self.nodes.retain(|v| cc_of[v.index()] < PENDING);
            if !gained.is_empty() {
                self.nodes.append(&mut gained);
                self.nodes.sort_unstable();
            }
        }
    }
}

/// Scans for VD-nodes and labels their components (positive edges between
/// VD-nodes only).
pub fn build_vd_index(g: &SignedGraph, cs: &CoreState, p: u32) -> VdIndex {
    let mut idx = VdIndex {
        p,
        nodes: Vec::new(),
        cc_of: vec![NONE; g.node_count()],
        cc_size: Vec::new(),
        cc_members: Vec::new(),
        free: Vec::new(),
        dirty: Vec::new(),
    };
    let mut pending = Vec::new();
    for v in g.alive_nodes() {
        if idx.vd_now(g, cs, v) {
            idx.cc_of[v.index()] = PENDING;
            pending.push(v);
        }
    }
    let mut queue = VecDeque::new();
    for &s in &pending {
        if idx.cc_of[s.index()] != PENDING {
            continue;
        }
        let label = idx.cc_size.len() as u32;
        idx.cc_of[s.index()] = label;
        queue.push_back(s);
        let mut members = Vec::new();
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for w in g.pos_neighbors(u) {
                if idx.cc_of[w.index()] == PENDING {
                    idx.cc_of[w.index()] = label;
                    queue.push_back(w);
                }
            }
        }
        idx.cc_size.push(members.len() as u32);
        idx.cc_members.push(members);
    }
    idx.nodes = pending;
    idx
}

pub fn lower_bound(g: &SignedGraph, idx: &VdIndex, v: NodeId) -> u32 {
    idx.lower_bound(g, v)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CcId(u32);

impl CcId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// A run of nested components with identical membership. One `CcNode`
/// stands for the chain of tree levels `core_lo..=core_hi`; the explicit
/// tree is recovered with [`CcTree::expanded`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcNode {
    pub core_lo: u32,
    pub core_hi: u32,
    pub size: u32,
    pub parent: Option<CcId>,
    pub children: Vec<CcId>,
    /// Σ size over `children`.
    pub child_size: u32,
}

/// One explicit tree node: a connected component of the `core`-core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitCcNode {
    pub level: u32,
    pub core: u32,
    pub members: Vec<NodeId>,
    /// Index into the returned vector; `None` means the dummy root.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CcTree {
    p: u32,
    slots: Vec<Option<CcNode>>,
    free: Vec<CcId>,
    roots: Vec<CcId>,
    root_members: Vec<Vec<NodeId>>,
    /// Position in `roots`, indexed by slot.
    root_pos: Vec<u32>,
    deepest: Vec<Option<CcId>>,
    top: Vec<Option<CcId>>,
    scratch: Scratch,
}

#[derive(Clone, Debug, Default)]
struct Scratch {
    dsu: Dsu,
    active: Vec<bool>,
    current: Vec<Option<CcId>>,
    kids: Vec<Vec<CcId>>,
    mark: Vec<u32>,
    label: Vec<u32>,
    epoch: u32,
}

impl CcTree {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn node(&self, id: CcId) -> &CcNode {
        self.slots[id.index()].as_ref().expect("live tree node")
    }

    /// Top-level components (children of the dummy root), in no fixed order.
    pub fn roots(&self) -> &[CcId] {
        &self.roots
    }

    /// Deepest explicit node holding `v`: the component of the c[v]-core
    /// that contains `v`. Its run always ends at `core_hi = c[v]`.
    pub fn starting_node(&self, v: NodeId) -> Option<CcId> {
        self.deepest.get(v.index()).copied().flatten()
    }

    /// Total size of the children of `v`'s starting node. These nodes sit
    /// in a strictly deeper core that does not contain `v`.
    pub fn children_immutable_size(&self, v: NodeId) -> Result<u32> {
        let cur = self.starting_node(v).ok_or(Error::NotInTree(v))?;
        Ok(self.node(cur).child_size)
    }

    /// Number of explicit levels below the dummy root.
    pub fn height(&self) -> u32 {
        self.roots
            .iter()
            .map(|&r| self.run_height(r))
            .max()
            .unwrap_or(0)
    }

    fn run_height(&self, id: CcId) -> u32 {
        let n = self.node(id);
        let below = n.children.iter().map(|&c| self.run_height(c)).max().unwrap_or(0);
        n.core_hi - n.core_lo + 1 + below
    }

    /// Upper bound on `|F(v)|`.
    ///
    /// With `top` the level-1 component of `v` and `inner` the part of it
    /// that lies in the (p+1)-core, followers are confined to
    /// `{v} ∪ (top \ inner)`. When c[v] = p the starting node is `top`
    /// itself and this is `|cur| - CI(v)`.
    pub fn upper_bound(&self, v: NodeId) -> Result<u32> {
        let cur = self.starting_node(v).ok_or(Error::NotInTree(v))?;
        let top = self.top[v.index()].expect("top set with deepest");
        let t = self.node(top);
        let inner = if t.core_hi > t.core_lo {
            t.size
        } else {
            t.child_size
        };
        let shell = t.size - inner;
        if self.node(cur).core_hi > self.p {
            Ok(shell + 1)
        } else {
            Ok(shell)
        }
    }

    fn alloc(&mut self, node: CcNode) -> CcId {
        if let Some(id) = self.free.pop() {
            self.slots[id.index()] = Some(node);
            id
        } else {
            self.slots.push(Some(node));
            self.root_pos.push(NONE);
            CcId(self.slots.len() as u32 - 1)
        }
    }

    fn release_subtree(&mut self, id: CcId) {
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if let Some(node) = self.slots[x.index()].take() {
                stack.extend(node.children);
                self.free.push(x);
            }
        }
    }

    /// Adds the subtrees for `nodes`. Without `under` they must be whole
    /// components of the p-core graph and become roots; with it they must be
    /// every member of `under` lying in a deeper core, and become its
    /// descendants.
    fn grow(
        &mut self,
        g: &SignedGraph,
        cs: &CoreState,
        mut nodes: Vec<NodeId>,
        under: Option<CcId>,
    ) {
        if nodes.is_empty() {
            return;
        }
        let n = g.node_count();
        let s = &mut self.scratch;
        s.dsu.ensure_len(n);
        if s.active.len() < n {
            s.active.resize(n, false);
            s.current.resize(n, None);
            s.kids.resize(n, Vec::new());
        }
        nodes.sort_unstable_by(|a, b| cs.coreness(*b).cmp(&cs.coreness(*a)).then(a.cmp(b)));

        let mut created: Vec<CcId> = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let k = cs.coreness(nodes[i]);
            let mut j = i;
            while j < nodes.len() && cs.coreness(nodes[j]) == k {
                j += 1;
            }
            let batch = &nodes[i..j];
            for v in batch {
                let x = v.index();
                self.scratch.active[x] = true;
                self.scratch.dsu.make(x);
                self.scratch.current[x] = None;
                self.scratch.kids[x].clear();
            }
            for &v in batch {
                for w in g.pos_neighbors(v) {
                    let s = &mut self.scratch;
                    if !s.active[w.index()] {
                        continue;
                    }
                    let a = s.dsu.find(v.index());
                    let b = s.dsu.find(w.index());
                    if a == b {
                        continue;
                    }
                    for r in [a, b] {
                        if let Some(id) = s.current[r].take() {
                            s.kids[r].push(id);
                        }
                    }
                    let (root, gone) = s.dsu.link_roots(a, b);
                    let moved = std::mem::take(&mut s.kids[gone]);
                    s.kids[root].extend(moved);
                }
            }
            for &v in batch {
                let r = self.scratch.dsu.find(v.index());
                if self.scratch.current[r].is_some() {
                    continue;
                }
                let children = std::mem::take(&mut self.scratch.kids[r]);
                let child_size = children.iter().map(|&c| self.node(c).size).sum();
                let size = self.scratch.dsu.size_of_root(r);
                let id = self.alloc(CcNode {
                    core_lo: k,
                    core_hi: k,
                    size,
                    parent: None,
                    children: children.clone(),
                    child_size,
                });
                for c in children {
                    self.slots[c.index()].as_mut().unwrap().parent = Some(id);
                }
                self.scratch.current[r] = Some(id);
                created.push(id);
            }
            for &v in batch {
                let r = self.scratch.dsu.find(v.index());
                self.deepest[v.index()] = self.scratch.current[r];
            }
            i = j;
        }

        if let Some(t) = under {
            for &id in &created {
                let node = self.slots[id.index()].as_mut().unwrap();
                if node.parent.is_none() {
                    node.parent = Some(t);
                }
            }
        }
        for &id in &created {
            let lo = match self.node(id).parent {
                Some(par) => self.node(par).core_hi + 1,
                None => self.p,
            };
            self.slots[id.index()].as_mut().unwrap().core_lo = lo;
        }
        if let Some(t) = under {
            let kids: Vec<CcId> = created
                .iter()
                .copied()
                .filter(|&id| self.node(id).parent == Some(t))
                .collect();
            let added: u32 = kids.iter().map(|&c| self.node(c).size).sum();
            let node = self.slots[t.index()].as_mut().unwrap();
            node.children.extend(kids);
            node.child_size += added;
            for &v in &nodes {
                self.top[v.index()] = Some(t);
            }
        } else {
            let mut tops: Vec<(CcId, NodeId)> = Vec::new();
            for &v in &nodes {
                let r = self.scratch.dsu.find(v.index());
                let t = self.scratch.current[r].expect("component has a node");
                self.top[v.index()] = Some(t);
                tops.push((t, v));
            }
            tops.sort_unstable();
            let mut k = 0;
            while k < tops.len() {
                let t = tops[k].0;
                let mut members = Vec::new();
                while k < tops.len() && tops[k].0 == t {
                    members.push(tops[k].1);
                    k += 1;
                }
                self.root_pos[t.index()] = self.roots.len() as u32;
                self.roots.push(t);
                self.root_members.push(members);
            }
        }
        for &v in &nodes {
            let x = v.index();
            self.scratch.active[x] = false;
            self.scratch.current[x] = None;
            self.scratch.kids[x].clear();
        }
    }

    /// Explicit level-by-level view: one entry per component per core
    /// value, parents before children.
    pub fn expanded(&self) -> Vec<ExplicitCcNode> {
        let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); self.slots.len()];
        for (i, d) in self.deepest.iter().enumerate() {
            let mut cur = *d;
            while let Some(c) = cur {
                members[c.index()].push(NodeId::new(i));
                cur = self.node(c).parent;
            }
        }
        let mut out = Vec::new();
        let mut order: Vec<CcId> = self.roots.clone();
        order.sort_by_key(|r| members[r.index()].first().copied());
        let mut stack: Vec<(CcId, Option<usize>)> =
            order.into_iter().rev().map(|r| (r, None)).collect();
        while let Some((id, parent)) = stack.pop() {
            let node = self.node(id);
            let mut m = members[id.index()].clone();
            m.sort_unstable();
            let mut par = parent;
            for core in node.core_lo..=node.core_hi {
                out.push(ExplicitCcNode {
                    level: core - self.p + 1,
                    core,
                    members: m.clone(),
                    parent: par,
                });
                par = Some(out.len() - 1);
            }
            let mut kids = node.children.clone();
            kids.sort_by_key(|c| members[c.index()].iter().min().copied());
            for c in kids.into_iter().rev() {
                stack.push((c, par));
            }
        }
        out
    }

    /// Order-free description used to compare two trees: every explicit
    /// node as (core, members, parent members).
    pub fn canonical(&self) -> Vec<(u32, Vec<NodeId>, Option<Vec<NodeId>>)> {
        let ex = self.expanded();
        let mut c: Vec<_> = ex
            .iter()
            .map(|e| {
                (
                    e.core,
                    e.members.clone(),
                    e.parent.map(|i| ex[i].members.clone()),
                )
            })
            .collect();
        c.sort();
        c
    }
}

/// Builds the core tree of a p-core graph from its coreness values.
///
/// Components are assembled with a union-find sweep from the highest
/// coreness down to `p`; a component that gains no node and absorbs no
/// neighbour between two levels extends its run instead of spawning a new
/// node.
pub fn build_cctree(g: &SignedGraph, cs: &CoreState, p: u32) -> CcTree {
    let n = g.node_count();
    let mut t = CcTree {
        p,
        slots: Vec::new(),
        free: Vec::new(),
        roots: Vec::new(),
        root_members: Vec::new(),
        root_pos: Vec::new(),
        deepest: vec![None; n],
        top: vec![None; n],
        scratch: Scratch {
            dsu: Dsu::with_len(n),
            active: vec![false; n],
            current: vec![None; n],
            kids: vec![Vec::new(); n],
            mark: vec![0; n],
            label: vec![0; n],
            epoch: 0,
        },
    };
    let nodes: Vec<NodeId> = g.alive_nodes().filter(|&v| cs.coreness(v) >= p).collect();
    t.grow(g, cs, nodes, None);
    t
}

pub fn upper_bound(t: &CcTree, v: NodeId) -> Result<u32> {
    t.upper_bound(v)
}

/// Updates both structures after `removed` left `g` (and `cs` was already
/// refreshed). Only top-level components that lost a node are touched; the
/// VD index is rescanned.
pub fn refresh_after_removal(
    mut t: CcTree,
    idx: VdIndex,
    g: &SignedGraph,
    cs: &CoreState,
    removed: &[NodeId],
) -> (CcTree, VdIndex) {
    if removed.is_empty() {
        return (t, idx);
    }
    let n = g.node_count();
    let s = &mut t.scratch;
    if s.mark.len() < n {
        s.mark.resize(n, 0);
        s.label.resize(n, 0);
    }
    // survivors next to a deleted node, grouped by top-level component
    s.epoch += 1;
    let mut seeds: Vec<(CcId, NodeId)> = Vec::new();
    for &v in removed {
        let Some(top) = t.top.get(v.index()).copied().flatten() else {
            continue;
        };
        seeds.push((top, v));
        for w in g.pos_neighbors(v) {
            if t.scratch.mark[w.index()] != t.scratch.epoch {
                t.scratch.mark[w.index()] = t.scratch.epoch;
                seeds.push((top, w));
            }
        }
    }
    for &v in removed {
        if v.index() < t.deepest.len() {
            t.deepest[v.index()] = None;
            t.top[v.index()] = None;
        }
    }
    seeds.sort_unstable();
    let mut loose = Vec::new();
    let mut i = 0;
    while i < seeds.len() {
        let root = seeds[i].0;
        let mut j = i;
        while j < seeds.len() && seeds[j].0 == root {
            j += 1;
        }
        let alive: Vec<NodeId> = seeds[i..j]
            .iter()
            .map(|&(_, v)| v)
            .filter(|&v| g.is_alive(v))
            .collect();
        t.refresh_root(g, cs, root, &alive, &mut loose);
        i = j;
    }
    debug_assert!(loose.iter().all(|&v| cs.coreness(v) >= t.p));
    t.grow(g, cs, loose, None);
    let mut idx = idx;
    idx.update(g, cs, removed);
    (t, idx)
}

impl CcTree {
    fn remove_root(&mut self, r: CcId) {
        let k = self.root_pos[r.index()] as usize;
        self.root_pos[r.index()] = NONE;
        self.roots.swap_remove(k);
        self.root_members.swap_remove(k);
        if let Some(&moved) = self.roots.get(k) {
            self.root_pos[moved.index()] = k as u32;
        }
        self.release_subtree(r);
    }

    /// Re-splits top-level component `r` after some of its members died.
    /// Searches started from the surviving `seeds` run in lockstep and merge
    /// on contact; once at most one is still open, every closed one is a
    /// complete piece. The largest piece keeps `r` and only its inner cores
    /// are rebuilt; the other pieces are pushed to `loose` for regrowing.
    fn refresh_root(
        &mut self,
        g: &SignedGraph,
        cs: &CoreState,
        r: CcId,
        seeds: &[NodeId],
        loose: &mut Vec<NodeId>,
    ) {
        let k = self.root_pos[r.index()] as usize;
        if seeds.is_empty() {
            self.remove_root(r);
            return;
        }
        let s = &mut self.scratch;
        s.epoch += 1;
        let epoch = s.epoch;
        let count = seeds.len();
        let mut group: Vec<usize> = (0..count).collect();
        let mut queue: Vec<VecDeque<NodeId>> = Vec::with_capacity(count);
        let mut seen: Vec<Vec<NodeId>> = Vec::with_capacity(count);
        for (i, &x) in seeds.iter().enumerate() {
            s.mark[x.index()] = epoch;
            s.label[x.index()] = i as u32;
            queue.push(VecDeque::from([x]));
            seen.push(vec![x]);
        }
        fn find(group: &mut [usize], mut x: usize) -> usize {
            while group[x] != x {
                group[x] = group[group[x]];
                x = group[x];
            }
            x
        }
        let mut open: Vec<usize> = (0..count).collect();
        while open.len() > 1 {
            for &i in &open {
                if group[i] != i {
                    continue;
                }
                let Some(u) = queue[i].pop_front() else {
                    continue;
                };
                for w in g.pos_neighbors(u) {
                    if s.mark[w.index()] != epoch {
                        s.mark[w.index()] = epoch;
                        s.label[w.index()] = i as u32;
                        queue[i].push_back(w);
                        seen[i].push(w);
                        continue;
                    }
                    let j = find(&mut group, s.label[w.index()] as usize);
                    if j == i {
                        continue;
                    }
                    group[j] = i;
                    let q = std::mem::take(&mut queue[j]);
                    queue[i].extend(q);
                    let mut v = std::mem::take(&mut seen[j]);
                    if v.len() > seen[i].len() {
                        std::mem::swap(&mut v, &mut seen[i]);
                    }
                    seen[i].extend(v);
                }
            }
            open.retain(|&i| group[i] == i && !queue[i].is_empty());
        }
        let groups: Vec<usize> = (0..count).filter(|&i| group[i] == i).collect();
        let main = match open.first() {
            Some(&i) => i,
            None => *groups
                .iter()
                .max_by_key(|&&i| (seen[i].len(), std::cmp::Reverse(i)))
                .expect("at least one search"),
        };
        for &i in &groups {
            if i == main {
                continue;
            }
            for &v in &seen[i] {
                s.label[v.index()] = NONE;
                self.deepest[v.index()] = None;
                self.top[v.index()] = None;
            }
            loose.extend_from_slice(&seen[i]);
        }
        let members: Vec<NodeId> = if open.is_empty() {
            let mut m = std::mem::take(&mut seen[main]);
            m.sort_unstable();
            m
        } else {
            let s = &self.scratch;
            self.root_members[k]
                .iter()
                .copied()
                .filter(|&v| {
                    g.is_alive(v) && !(s.mark[v.index()] == epoch && s.label[v.index()] == NONE)
                })
                .collect()
        };
        let p = self.p;
        if !members.iter().any(|&v| cs.coreness(v) == p) {
            // no p-shell left: the run above p may now extend, regrow it whole
            self.remove_root(r);
            for &v in &members {
                self.deepest[v.index()] = None;
                self.top[v.index()] = None;
            }
            loose.extend(members);
            return;
        }
        let node = self.slots[r.index()].as_mut().unwrap();
        let kids = std::mem::take(&mut node.children);
        node.core_lo = p;
        node.core_hi = p;
        node.size = members.len() as u32;
        node.child_size = 0;
        for c in kids {
            self.release_subtree(c);
        }
        let mut inner = Vec::new();
        for &v in &members {
            if cs.coreness(v) == p {
                self.deepest[v.index()] = Some(r);
            } else {
                self.deepest[v.index()] = None;
                inner.push(v);
            }
        }
        self.root_members[k] = members;
        self.grow(g, cs, inner, Some(r));
    }

    #[cfg(test)]
    fn assert_consistent(&self, g: &SignedGraph, cs: &CoreState) {
        let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); self.slots.len()];
        for v in g.alive_nodes() {
            let mut cur = self.deepest[v.index()];
            assert_eq!(self.node(cur.unwrap()).core_hi, cs.coreness(v));
            let mut last = None;
            while let Some(c) = cur {
                members[c.index()].push(v);
                last = Some(c);
                cur = self.node(c).parent;
            }
            assert_eq!(last, self.top[v.index()]);
        }
        for (k, &r) in self.roots.iter().enumerate() {
            assert_eq!(self.root_pos[r.index()] as usize, k);
            assert_eq!(self.root_members[k], members[r.index()]);
            assert_eq!(self.node(r).core_lo, self.p);
        }
        for (i, slot) in self.slots.iter().enumerate() {
            if let Some(node) = slot {
                assert_eq!(node.size as usize, members[i].len());
                let kids: u32 = node.children.iter().map(|&c| self.node(c).size).sum();
                assert_eq!(node.child_size, kids);
                for &c in &node.children {
                    assert_eq!(self.node(c).parent, Some(CcId(i as u32)));
                }
            }
        }
    }
}
