//! Error type shared by the numeric core.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A weight vector failed validation.
    #[error("invalid weights: {0}")]
    Weights(String),

    /// An input collection that must be non-empty was empty.
    #[error("empty input: {0}")]
    Empty(String),

    /// The stacked least-squares design is rank deficient.
    #[error("singular least-squares system: {block} block, column {column}")]
    SingularSystem {
        /// Which block of the joint design is deficient.
        block: &'static str,
        /// Offending column index within the stacked design.
        column: usize,
    },

    /// A covariance matrix was not symmetric positive-definite.
    #[error("covariance matrix is not symmetric positive-definite")]
    NotSpd,
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn empty(msg: impl Into<String>) -> Self {
        Error::Empty(msg.into())
    }

    pub fn weights(msg: impl Into<String>) -> Self {
        Error::Weights(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
