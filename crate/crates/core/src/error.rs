use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vocabulary: {0}")]
    Vocabulary(String),

    #[error("session: {0}")]
    Session(String),

    #[error("fold: {0}")]
    Fold(String),

    #[error("filter design: {0}")]
    FilterDesign(String),

    #[error("signal: {0}")]
    Signal(String),

    #[error("flat channel {channel}: no activity in training data")]
    FlatChannel { channel: usize },

    #[error("simulator: {0}")]
    Simulator(String),

    #[error("mixer: {0}")]
    Mixer(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("network: {0}")]
    Network(String),

    #[error("classifier: {0}")]
    Classifier(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
