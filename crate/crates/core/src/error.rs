use thiserror::Error;

/// Errors raised by space construction, metric evaluation and cover building.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("ray parameter must be nonnegative, got {0}")]
    NegativeParameter(f64),

    #[error("identical boundary points: branch time is infinite")]
    IdenticalBoundaryPoints,

    #[error("divergent Gromov product: t - f(t)/2 not Cauchy up to t = {horizon} (last value {last})")]
    DivergentProduct { horizon: f64, last: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
