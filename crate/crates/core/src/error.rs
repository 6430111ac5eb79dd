use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomoError {
    #[error("invalid image grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scan geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid beam profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0}")]
    Degenerate(String),
}

pub type Result<T, E = TomoError> = std::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(TomoError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
