use thiserror::Error;

/// Errors raised by constant evaluation, quadrature and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("norm is not differentiable at {0:?}")]
    NonDifferentiable(Vec<f64>),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("quadrature did not reach tolerance {tol:e} (best {value}, error estimate {abs_error:e})")]
    Accuracy { value: f64, abs_error: f64, tol: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("profile becomes negative: {0}")]
    Negativity(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
