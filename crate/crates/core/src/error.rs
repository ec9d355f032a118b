use thiserror::Error;

/// Errors produced by the scheduling laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("value iteration did not converge after {iterations} iterations (span {span:e})")]
    NonConvergence { iterations: usize, span: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
