use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the mechanisms, the geometry helpers and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller supplied an argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The request would exceed a memory or time guard.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Malformed input data. `row` is 1-based when known.
    #[error("invalid input{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Input { row: Option<usize>, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn input(row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Input {
            row,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
