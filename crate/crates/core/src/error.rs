use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A single record (line) of an input file could not be accepted.
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate doc_id {doc_id:?} (line {line})")]
    DuplicateId { doc_id: String, line: usize },

    #[error("invalid level of evidence {0:?}; expected one of 1a, 1b, 2a, 2b, 3a, 3b, 4")]
    InvalidLabel(String),

    #[error("invalid evidence band {0:?}; expected one of all, loe3, loe2, loe1")]
    InvalidBand(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training data contains a single class ({0}); at least two are required")]
    SingleClass(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("document {0:?} has no assigned level of evidence")]
    MissingLoe(String),

    #[error("index file: {0}")]
    IndexFormat(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(line: usize, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            message: message.into(),
        }
    }
}
