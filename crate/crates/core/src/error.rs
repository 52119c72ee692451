use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid data: {0}")]
    Validation(String),

    #[error("subject {subject}: missing channel {channel}")]
    MissingChannel { subject: String, channel: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite feature at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: String },

    #[error("config: {0}")]
    Config(String),

    #[error("model artifact: {0}")]
    Artifact(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Numerical(_) => ErrorCategory::Numerical,
            Error::Io { .. } => ErrorCategory::Io,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::MissingChannel { .. }
            | Error::Schema(_)
            | Error::Dimension(_)
            | Error::NonFiniteFeature { .. }
            | Error::Artifact(_) => ErrorCategory::Data,
        }
    }
}
