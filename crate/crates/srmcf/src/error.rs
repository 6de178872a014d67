use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("config key `{key}`: {reason}")]
    Key { key: &'static str, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] srmcf_core::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl AppError {
    pub fn key(key: &'static str, reason: impl Into<String>) -> Self {
        AppError::Key {
            key,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        AppError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 failed check, 2 bad input, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::CheckFailed(_) => 1,
            AppError::Core(
                srmcf_core::Error::NonFiniteField { .. } | srmcf_core::Error::CflViolation { .. },
            ) => 3,
            _ => 2,
        }
    }
}
