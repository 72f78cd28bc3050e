use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::AlignmentReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input at a known location.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Cross-reference failure between inputs (unknown ids, count mismatches).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Values that are well-formed but violate a numeric invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Structural problems in a JSONL record.
    #[error("schema error: {0}")]
    Schema(String),

    /// An operation was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("corpus and samples are not aligned: {}", .0.summary())]
    Alignment(Box<AlignmentReport>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// True when the error stems from user input rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied
            ),
            _ => true,
        }
    }
}
