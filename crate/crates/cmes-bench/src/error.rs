//! Harness error type and CLI exit-code mapping.

use std::io;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Opt(#[from] cmes::Error),
    #[error("plot error: {0}")]
    Plot(String),
}

impl BenchError {
    /// 2 for numerical failures, 1 for everything else; success never
    /// reaches an error value.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Opt(cmes::Error::Numerical(_) | cmes::Error::Blackbox(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_separate_config_from_numerical() {
        assert_eq!(BenchError::Config("x".into()).exit_code(), 1);
        assert_eq!(
            BenchError::Opt(cmes::Error::InvalidArgument("x".into())).exit_code(),
            1
        );
        assert_eq!(
            BenchError::Opt(cmes::Error::Numerical("x".into())).exit_code(),
            2
        );
        assert_eq!(
            BenchError::Opt(cmes::Error::Blackbox("x".into())).exit_code(),
            2
        );
    }
}
