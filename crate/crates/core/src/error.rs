use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("method not found at HEAD: {0}")]
    MethodNotFound(String),

    #[error("repository unreadable at {path}: {message}")]
    RepositoryUnreadable { path: PathBuf, message: String },

    #[error("schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },

    #[error("unresolved method locator at line {line}: {locator}")]
    UnresolvedMethod { line: usize, locator: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("too few examples: need at least {min}, got {actual}")]
    TooFewExamples { min: usize, actual: usize },

    #[error("training labels are degenerate: {0}")]
    DegenerateLabels(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid fixture spec: {0}")]
    InvalidFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
