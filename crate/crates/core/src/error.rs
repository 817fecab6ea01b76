use crate::querygraph::{NodeId, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A compressed node tried to read a wire that was not supplied. Always a
    /// construction bug, never an input problem.
    #[error("missing wire value for node {node}")]
    MissingWire { node: String },

    #[error("node {0} is a conductor; its semantics need a compressed graph")]
    ConductorWithoutContext(NodeId),

    #[error("{what}: size {size} exceeds the configured cap {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid separator tree: {0}")]
    InvalidTree(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
