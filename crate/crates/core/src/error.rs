use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("unknown source distribution `{0}`")]
    UnknownSource(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("sample size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("sample size {size} exceeds the exact-solver guard of {limit}")]
    GuardExceeded { size: usize, limit: usize },

    #[error("moment E|X|^{order} is infinite for `{source_id}` (finite only below {limit})")]
    InfiniteMoment {
        source_id: String,
        order: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
