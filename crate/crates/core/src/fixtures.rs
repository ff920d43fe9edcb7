//! Small hand-built graphs shared by tests, docs and the CLI smoke runs.

use crate::graph::{GraphBuilder, NodeId, Sign, SignedGraph};

/// Nine nodes `a..i`, twelve positive and four negative edges. Node `d`
/// has three negative neighbours (`b`, `e`, `f`), so with `p = 2, n = 2` the
/// whole graph is a 2-core that violates the negative constraint, and the
/// best repair deletes `b` and `e` (cascading `c`) for a 6-node answer.
pub const NINE_NODE_EDGES: &[(&str, &str, Sign)] = &[
    ("a", "b", Sign::Positive),
    ("b", "c", Sign::Positive),
    ("c", "d", Sign::Positive),
    ("c", "e", Sign::Positive),
    ("a", "d", Sign::Positive),
    ("a", "e", Sign::Positive),
    ("a", "f", Sign::Positive),
    ("e", "f", Sign::Positive),
    ("d", "g", Sign::Positive),
    ("g", "h", Sign::Positive),
    ("h", "i", Sign::Positive),
    ("f", "i", Sign::Positive),
    ("d", "b", Sign::Negative),
    ("d", "e", Sign::Negative),
    ("d", "f", Sign::Negative),
    ("c", "h", Sign::Negative),
];

pub fn nine_node_example() -> SignedGraph {
    let mut b = GraphBuilder::new();
    for &(u, v, s) in NINE_NODE_EDGES {
        b.add_edge(u, v, s);
    }
    b.build().0
}

/// Same graph as whitespace-separated `u v s` lines.
pub fn nine_node_edgelist() -> String {
    NINE_NODE_EDGES
        .iter()
        .map(|(u, v, s)| format!("{u} {v} {}\n", if *s == Sign::Positive { "+1" } else { "-1" }))
        .collect()
}

/// Looks up labels and returns their ids ascending. Panics on unknown labels.
pub fn label_ids(g: &SignedGraph, labels: &[&str]) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = labels
        .iter()
        .map(|l| g.node_by_label(l).unwrap_or_else(|| panic!("unknown label {l}")))
        .collect();
    v.sort_unstable();
    v
}
