use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: schema error: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: duplicate record for date {date} and ticker {ticker}")]
    DuplicateRecord {
        path: PathBuf,
        line: u64,
        date: String,
        ticker: String,
    },

    #[error("empty panel: {0}")]
    EmptyPanel(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("exact enumeration limited to n <= {limit}, got n = {n}")]
    OracleSize { n: usize, limit: usize },

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
