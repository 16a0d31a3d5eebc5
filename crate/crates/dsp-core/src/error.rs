//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed input files: bad headers, unparsable fields, duplicate rows.
    /// Messages carry 1-based line numbers where they apply.
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("empty dataset")]
    EmptyDataset,

    /// A coordinate column (or a batch) has no spread to standardize against.
    #[error("zero variance: {0}")]
    ZeroVariance(String),

    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// A gradient or parameter went NaN/Inf; the offending update is refused.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub fn invalid_data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
