use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("node id {0} does not fit in the 32-bit index space")]
    IdOverflow(u64),

    #[error("unknown node name {0:?}")]
    UnknownName(String),

    #[error("duplicate subset entry {0:?}")]
    DuplicateEntry(String),

    #[error("node index {index} out of range for a graph with {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },

    #[error("vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("vector is not a probability vector (L1 norm {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate eigenvector normalization: left·right = {0:e}")]
    DegenerateNormalization(f64),

    #[error("negative entry {value:e} at ({row}, {col}) of {component}")]
    NegativeEntry {
        component: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("matrix entry ({row}, {col}) is zero, perturbation is meaningless")]
    ZeroEntry { row: usize, col: usize },

    #[error("probability of node {0} is zero, logarithmic derivative undefined")]
    ZeroProbability(usize),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("{0}")]
    Invalid(String),

    #[error("unknown format {0:?}")]
    UnknownFormat(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
