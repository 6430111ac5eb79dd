use std::path::Path;

use thiserror::Error;
use thztomo::TomoError;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed dataset: {0}")]
    Format(String),

    #[error("data/model mismatch: {0}")]
    Mismatch(String),

    #[error("{0} verification check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        CliError::Format(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Format(_) | CliError::Mismatch(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        match e {
            TomoError::DimensionMismatch { .. } | TomoError::InvalidGeometry(_) => {
                CliError::Mismatch(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}
