//! Error type shared across the crate.

/// Errors surfaced by model fitting, sampling, and the optimization loop.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape disagreement between inputs (wrong lengths, mismatched dims).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A numerical routine failed beyond recovery (factorization, divergence).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The blackbox reported a failure in a mode that cannot absorb it.
    #[error("blackbox failure: {0}")]
    Blackbox(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
