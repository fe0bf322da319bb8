use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("window mismatch: {left} vs {right}")]
    WindowMismatch { left: usize, right: usize },

    #[error("no valid subsequences of length {window}: {context}")]
    NoValidSubsequences { window: usize, context: String },

    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty shapelet set: {0}")]
    EmptyShapeletSet(String),

    #[error("invalid prediction matrix: {0}")]
    InvalidPredictions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            err,
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::EmptyDataset(_) => "empty_dataset",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::WindowMismatch { .. } => "window_mismatch",
            Error::NoValidSubsequences { .. } => "no_valid_subsequences",
            Error::TooFewClasses(_) => "too_few_classes",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::EmptyShapeletSet(_) => "empty_shapelet_set",
            Error::InvalidPredictions(_) => "invalid_predictions",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
