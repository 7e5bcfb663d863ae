use thiserror::Error;

use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enumeration over {count} best-response mappings exceeds the guard of {limit}")]
    EnumerationGuard { count: f64, limit: f64 },
    #[error("unsupported follower universe: {0}")]
    UnsupportedUniverse(String),
    #[error("big-M constant too small: {0}")]
    BigMTooSmall(String),
    #[error("separation oracle failed: {0}")]
    OracleFailure(String),
    #[error("time limit reached")]
    TimeLimit,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
