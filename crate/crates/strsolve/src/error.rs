//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid caller-supplied data (letter outside the alphabet, dimension
    /// mismatch, overlapping register vectors, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Syntax error in a regex, SMT-LIB script, or transducer definition.
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    /// A construct the frontend recognises but does not support.
    #[error("unsupported construct: {0}")]
    Unsupported(String),

    /// A configured resource limit was exceeded; the solver reports unknown.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Broken internal invariant. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
