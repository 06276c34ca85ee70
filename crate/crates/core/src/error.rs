use thiserror::Error;

/// Errors shared across the solver, simulation, and experiment modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    #[error("matrix is not positive semi-definite")]
    NotPsd,

    #[error("invalid market instance: {0}")]
    InvalidInstance(String),

    #[error("utility exponent {0} exceeds the overflow cap of 700")]
    Overflow(f64),

    #[error("bonus dimension {dim} out of range for a {n}-dimensional instance")]
    BadDimension { dim: usize, n: usize },

    #[error("numeric oracle failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("invalid resource profile: {0}")]
    InvalidProfile(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
