//! Summary statistics of node subsets: edge counts, positive triangles and
//! the average local clustering coefficient.

use serde::Serialize;

use signedcore::{Layer, NodeId, SignedGraph};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgraphStats {
    pub nodes: usize,
    pub pos_edges: usize,
    pub neg_edges: usize,
    pub triangles: u64,
    pub clustering: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cmax: Option<u32>,
}

/// Number of common elements of two ascending slices.
fn intersect_count(a: &[NodeId], b: &[NodeId]) -> u64 {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Per-node triangle counts of the positive layer restricted to `inside`,
/// using forward adjacency lists (neighbours with a larger id) and sorted
/// intersections.
fn triangles_per_node(g: &SignedGraph, nodes: &[NodeId], inside: &[bool]) -> Vec<u64> {
    let fwd: Vec<Vec<NodeId>> = (0..g.node_count())
        .map(|i| {
            let v = NodeId::new(i);
            if !inside[i] {
                return Vec::new();
            }
            g.adjacency(Layer::Positive, v)
                .iter()
                .copied()
                .filter(|w| *w > v && inside[w.index()])
                .collect()
        })
        .collect();
    let mut tri = vec![0u64; g.node_count()];
    for &u in nodes {
        for &v in &fwd[u.index()] {
            let (a, b) = (&fwd[u.index()], &fwd[v.index()]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = a[i];
                        tri[u.index()] += 1;
                        tri[v.index()] += 1;
                        tri[w.index()] += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    tri
}

/// Positive triangles of the whole alive graph.
pub fn triangle_count(g: &SignedGraph) -> u64 {
    let nodes: Vec<NodeId> = g.alive_nodes().collect();
    subgraph_stats(g, &nodes).triangles
}

/// Statistics of the subgraph induced by `nodes` (alive nodes only). The
/// clustering coefficient is the mean local coefficient over all nodes,
/// with nodes of positive degree below two counting as 0.
pub fn subgraph_stats(g: &SignedGraph, nodes: &[NodeId]) -> SubgraphStats {
    let mut inside = vec![false; g.node_count()];
    let nodes: Vec<NodeId> = nodes.iter().copied().filter(|&v| g.is_alive(v)).collect();
    for &v in &nodes {
        inside[v.index()] = true;
    }
    let degree = |layer: Layer, v: NodeId| {
        g.adjacency(layer, v)
            .iter()
            .filter(|w| inside[w.index()])
            .count()
    };
    let pos_deg: Vec<usize> = nodes.iter().map(|&v| degree(Layer::Positive, v)).collect();
    let pos_edges = pos_deg.iter().sum::<usize>() / 2;
    let neg_edges = nodes.iter().map(|&v| degree(Layer::Negative, v)).sum::<usize>() / 2;
    let tri = triangles_per_node(g, &nodes, &inside);
    let triangles = nodes.iter().map(|v| tri[v.index()]).sum::<u64>() / 3;
    let clustering = if nodes.is_empty() {
        0.0
    } else {
        nodes
            .iter()
            .zip(&pos_deg)
            .map(|(v, &d)| {
                if d < 2 {
                    0.0
                } else {
                    2.0 * tri[v.index()] as f64 / (d as f64 * (d as f64 - 1.0))
                }
            })
            .sum::<f64>()
            / nodes.len() as f64
    };
    SubgraphStats {
        nodes: nodes.len(),
        pos_edges,
        neg_edges,
        triangles,
        clustering,
        cmax: None,
    }
}

/// Common positive neighbours of two nodes.
pub fn common_neighbours(g: &SignedGraph, u: NodeId, v: NodeId) -> u64 {
    intersect_count(g.adjacency(Layer::Positive, u), g.adjacency(Layer::Positive, v))
}
