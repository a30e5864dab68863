use std::path::PathBuf;

use num_complex::Complex64;

/// Errors produced across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("root solver did not converge for {poly} (residual {residual:e})")]
    Solver {
        poly: String,
        best: Vec<Complex64>,
        residual: f64,
    },

    #[error("root cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("root cache {path} holds n={found}, expected n={expected}")]
    CacheMismatch {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("{0}")]
    OutOfScope(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
