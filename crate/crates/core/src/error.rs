use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A data row could not be parsed. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{0} is empty")]
    Empty(String),

    /// A filter or lookup left nothing to work with.
    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("raster window {raster_s} s does not match configured window {config_s} s")]
    WindowMismatch { raster_s: f64, config_s: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("'{0}' is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
