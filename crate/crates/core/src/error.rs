use thiserror::Error;

/// Errors raised by the ladder toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ladder length {0} is too short: periodic leg bonds double-count below 4 rungs")]
    LadderTooShort(usize),

    #[error("ladder length {0} must be even")]
    OddLadder(usize),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("density matrix is not of X form: off-pattern element of magnitude {magnitude:e} at ({row}, {col})")]
    XFormViolation {
        magnitude: f64,
        row: usize,
        col: usize,
    },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    Convergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("missing table cell: {0}")]
    Lookup(String),

    #[error("insufficient table coverage; missing cells: {}", .missing.join(", "))]
    Coverage { missing: Vec<String> },

    #[error("invalid density matrix: {0}")]
    Validation(String),

    #[error("corrupt cache file {path}: {reason}")]
    CorruptCache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
