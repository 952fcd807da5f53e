//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the SYK Trotter laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands have incompatible sizes (qubit counts, matrix dimensions).
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    Validation(String),
    /// A mathematical precondition (Hermiticity, normalization, ...) failed.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A computation would exceed a configured resource guard.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A caller-supplied function broke its documented contract.
    #[error("contract violated: {0}")]
    Contract(String),
    /// An error ratio was requested against a zero bound with nonzero error.
    #[error("error ratio undefined: {0}")]
    RatioUndefined(String),
    /// Reading or writing files failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
