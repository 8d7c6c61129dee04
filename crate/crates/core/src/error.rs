use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A dataset file is missing or does not parse.
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Dataset files parse individually but contradict each other.
    #[error("inconsistent dataset: {0}")]
    Consistency(String),

    /// The requested computation would exceed the configured resource budget.
    #[error("resource limit exceeded: {what} needs {required} bytes, budget is {budget} bytes")]
    ResourceLimit { what: String, required: u128, budget: u128 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
