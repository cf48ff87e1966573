use thiserror::Error;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("model has no threshold")]
    MissingThreshold,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = core::result::Result<T, Error>;
