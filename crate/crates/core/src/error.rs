use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into input problems ([`Error::is_resource_cap`] is false)
/// and refusals to allocate or enumerate beyond a configured limit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability {value}: must lie in [0, 1]")]
    InvalidProbability { value: f64 },

    #[error("probability matrix is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("negative or non-finite entry {value} at index {index}")]
    InvalidEntry { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("resource cap exceeded: {what} needs {needed}, limit is {limit}")]
    ResourceCap {
        what: &'static str,
        needed: f64,
        limit: f64,
    },
}

impl Error {
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
