use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid character {0:?} in word (expected A-Z)")]
    InvalidCharacter(char),

    #[error("word {0:?} must be exactly three letters")]
    InvalidWordLength(String),

    #[error("error kind None cannot be injected")]
    NoErrorKind,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed manifest row {row}: {reason}")]
    MalformedManifest { row: usize, reason: String },

    #[error("missing image file for {image_id}")]
    MissingImage { image_id: String },

    #[error("malformed PGM {path}: {reason}")]
    MalformedPgm { path: PathBuf, reason: String },

    #[error("malformed measurement archive: {0}")]
    MalformedArchive(String),

    #[error("training data must contain both labels")]
    SingleClass,

    #[error("non-finite feature at sample {sample}, dimension {dim}")]
    NonFinite { sample: usize, dim: usize },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("train/test overlap on {count} image ids (first: {first})")]
    SplitOverlap { count: usize, first: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
