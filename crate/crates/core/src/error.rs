//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by simulator, dataset, and model operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two containers that must agree in length do not.
    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An operation received an empty input it cannot work with.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A search touched a report entry that was never measured.
    #[error("unmeasured report entry at tx {tx}, rx {rx}")]
    Unmeasured { tx: usize, rx: usize },

    /// Model and dataset disagree about which codebook produced them.
    #[error("codebook fingerprint mismatch: model {model}, dataset {dataset}")]
    FingerprintMismatch { model: String, dataset: String },

    /// A structured text file (CSV, config) failed to parse.
    #[error("{path}:{line}: bad {column}: {reason}")]
    Parse {
        path: String,
        line: usize,
        column: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for [`Error::InvalidParameter`].
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
