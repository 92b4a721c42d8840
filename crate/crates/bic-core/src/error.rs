use thiserror::Error;

/// Failures reported by the solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BicError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("analytic continuation undefined at z = {re} + {im}i")]
    Continuation { re: f64, im: f64 },
    #[error("quadrature did not converge (achieved error {achieved:e}, requested {requested:e})")]
    Accuracy { achieved: f64, requested: f64 },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("block decomposition residual {0:e} above threshold")]
    Decomposition(f64),
    #[error("invalid label: {0}")]
    Label(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no convergence: {message}")]
    NoConvergence { message: String, trajectory: Vec<[f64; 2]> },
}

pub type Result<T> = std::result::Result<T, BicError>;
