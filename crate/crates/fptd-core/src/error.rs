//! Error type shared across the crate.

use alloc::string::String;

/// Everything that can go wrong when building models or running estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter is outside its admissible range.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A function argument is outside the mathematical domain.
    #[error("domain error in `{context}`: {reason}")]
    Domain { context: &'static str, reason: String },

    /// A time grid is unusable for the requested operation.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// The requested oracle does not support this jump distribution.
    #[error("unsupported jump kind for {context}")]
    UnsupportedJumpKind { context: &'static str },

    /// The Kendall identity requires a spectrally negative process.
    #[error("process is not spectrally negative: {0}")]
    NotSpectrallyNegative(String),

    /// The density representation's hypotheses fail for this model.
    #[error("density representation not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub fn domain(context: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            context,
            reason: reason.into(),
        }
    }

    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
