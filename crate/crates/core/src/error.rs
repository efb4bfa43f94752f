use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed line in one of the input files. `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unknown column `{column}` in {}", path.display())]
    UnknownColumn { path: PathBuf, column: String },

    #[error("missing column `{column}` in {}", path.display())]
    MissingColumn { path: PathBuf, column: String },

    #[error("feature schema mismatch at `{feature}`: {message}")]
    Schema { feature: String, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("training diverged: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub(crate) fn from_csv(path: impl Into<PathBuf>, err: csv::Error) -> Self {
        let path = path.into();
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path, source },
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => Error::Parse {
                path,
                line,
                message: format!("expected {expected_len} fields, found {len}"),
            },
            csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
                path,
                line,
                message: format!("invalid UTF-8: {err}"),
            },
            kind => Error::Parse {
                path,
                line,
                message: format!("{kind:?}"),
            },
        }
    }

    /// Process exit code for the command-line driver: 2 for I/O failures, 1 for
    /// everything else (validation).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
