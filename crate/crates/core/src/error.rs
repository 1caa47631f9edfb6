//! Crate-wide error type.

/// Errors produced by construction, evaluation, and study routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two values that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An input collection that must be non-empty is empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A node or entry index is outside its valid range.
    #[error("index {index} out of range {min}..={max}")]
    IndexOutOfRange {
        index: usize,
        min: usize,
        max: usize,
    },

    /// Filter factorization did not converge or did not reach the required
    /// accuracy; carries the offending taps so the failure is reproducible.
    #[error("filter factorization failed for taps {taps:?}: {reason}")]
    Factorization { taps: Vec<f64>, reason: String },

    /// A hard bound asserted by a study was violated.
    #[error("bound violated: {0}")]
    BoundViolated(String),

    /// A serialized network could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
