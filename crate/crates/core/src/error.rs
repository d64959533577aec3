use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("io error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("{what} has {actual} items, above the configured cap of {cap}")]
    TooLarge {
        what: &'static str,
        actual: usize,
        cap: usize,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable kind, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } | Error::Stream(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
            Error::InvalidInput(_) => "invalid_input",
            Error::Empty(_) => "empty",
            Error::TooLarge { .. } => "too_large",
        }
    }
}
