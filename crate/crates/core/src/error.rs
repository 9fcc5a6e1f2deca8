use thiserror::Error;

/// Errors raised by grid construction, operators and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mask mismatch: expected {expected} values, got {got}")]
    MaskMismatch { expected: usize, got: usize },

    #[error("empty region")]
    EmptyRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid fractional order s = {0}; expected 0 < s <= 1")]
    InvalidOrder(f64),

    #[error("invalid operator data: {0}")]
    InvalidOperator(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("penalty overflow at eps = {eps}: increase eps or damping")]
    PenaltyOverflow { eps: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("input is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("discretization fault: {0}")]
    Discretization(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
