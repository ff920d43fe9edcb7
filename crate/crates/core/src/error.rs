use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("node {0} is out of range")]
    NodeOutOfRange(NodeId),

    #[error("node {0} is not alive")]
    DeadNode(NodeId),

    #[error("node {0} listed more than once in a removal set")]
    DuplicateRemoval(NodeId),

    #[error("graph is not a {p}-core graph (minimum positive degree {delta})")]
    NotPCore { p: u32, delta: u32 },

    #[error("follower set is stale: member {0} is no longer alive")]
    StaleFollowers(NodeId),

    #[error("node {0} is not covered by the core tree")]
    NotInTree(NodeId),

    #[error("incompatible sketches: {0}")]
    SketchMismatch(String),

    #[error("exact solver refuses {nodes} alive nodes (cap is {cap})")]
    OracleCap { nodes: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown query node {0}")]
    UnknownNode(String),

    #[error("requested {requested} negative edges but only {available} node pairs are free")]
    TooManyNegatives { requested: u64, available: u64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
