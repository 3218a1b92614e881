use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid schema, augmentation or training configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("dataset is empty{0}")]
    EmptyDataset(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("undefined rate for group `{group}`: no {missing} in group")]
    UndefinedRate {
        group: String,
        missing: &'static str,
    },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
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

    /// Process exit code for the command line front end: 2 usage/config,
    /// 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::SchemaMismatch(_)
            | Error::Parse { .. }
            | Error::EmptyDataset(_)
            | Error::Dimension { .. }
            | Error::EmptyGroup(_)
            | Error::UndefinedRate { .. }
            | Error::Checkpoint(_)
            | Error::Io { .. } => 3,
            Error::NonFinite(_) => 4,
        }
    }
}
