//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by graph generation, model construction, estimation and
/// the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value out of domain: {0}")]
    OutOfDomain(String),

    #[error("matrix I - B is not positive definite (lambda_min = {lambda_min:.6e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("vertex {0} is isolated (degree scaling undefined)")]
    IsolatedVertex(usize),

    #[error("Cholesky factorization failed: {0}")]
    CholeskyFailed(String),

    #[error("combinatorial budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
