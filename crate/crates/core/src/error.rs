use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(u32, u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("edge ({u}, {v}) references a node outside 0..{node_count}")]
    NodeOutOfRange { u: u32, v: u32, node_count: usize },
    #[error("node set is not a single connected component")]
    Disconnected,
    #[error("empty node set")]
    EmptyComponent,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("curve never drops below the giant-component threshold; extend the grid")]
    GridTooShort,
    #[error("effective degree {0} is at the percolation threshold where the diameter diverges")]
    SingularPoint(f64),
    #[error("exhaustive path search limited to {limit} nodes (largest functional component is NP-hard), got {nodes}")]
    TooLargeForOracle { nodes: usize, limit: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
