//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("csv format error at row {row}, column {col}: {msg}")]
    CsvFormat { row: usize, col: usize, msg: String },

    #[error("rate undetectable: {0}")]
    RateUndetectable(String),

    #[error("no stable matching exists for the given preference lists")]
    NoStableMatching,

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Tag an error with the pipeline stage it surfaced from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
