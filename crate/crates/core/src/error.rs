use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: conductance must be positive, got {value}")]
    NonPositiveConductance { line: usize, value: f64 },

    #[error("network support is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("vertex {vertex} out of range for a network with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("network has no vertices")]
    EmptyNetwork,

    #[error("vertex {vertex} must not belong to the conditioning set")]
    VertexInSet { vertex: usize },

    #[error("invalid vertex set: {0}")]
    InvalidSet(String),

    #[error("operation requires a tree: {0}")]
    NotATree(String),

    #[error("operation requires unit conductances")]
    NotUnitConductance,

    #[error("factorization failed after jitter {jitter:e} (min pivot {min_pivot:e}, trace {trace:e})")]
    Factorization {
        jitter: f64,
        min_pivot: f64,
        trace: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("multigraph is not Eulerian: {0}")]
    NotEulerian(String),

    #[error("enumeration cap exceeded: {what} is {actual}, cap {cap}")]
    CapExceeded {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trace is not anchored at an inverse local time")]
    UnanchoredTrace,

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
