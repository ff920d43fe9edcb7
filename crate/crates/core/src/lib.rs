//! (p,n)-cores of signed networks.
//!
//! A (p,n)-core is a node set in which every member has at least `p`
//! positive and fewer than `n` negative neighbours inside the set. Finding
//! a maximum one is NP-hard; this crate provides three greedy heuristics
//! (`fba`, `dfba`, `fca`), the follower bounds that make `dfba` prune, a
//! HyperLogLog ball estimator for `fca`, and an exact solver for graphs of
//! up to 22 nodes.

pub mod algorithms;
pub mod bounds;
pub mod core_decomp;
mod dsu;
pub mod error;
pub mod fixtures;
pub mod followers;
pub mod graph;
pub mod io;
pub mod sketch;

pub use error::{Error, Result};
pub use graph::{DegreeSummary, GraphBuilder, Layer, NodeId, Sign, SignedGraph};
pub use algorithms::{run, AlgoConfig, Algorithm, RunReport};
pub use followers::{compute_followers, is_valid_pncore, oracle_max_pncore};
