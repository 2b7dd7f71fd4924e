use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("stream validation failed: {0}")]
    Validation(String),

    #[error("data access violation: session {session} touched train data of task {task}")]
    AccessViolation { session: usize, task: usize },

    #[error("session out of order: expected {expected}, got {got}")]
    SessionOrder { expected: usize, got: usize },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
