use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value {value} at position {index} is not bipolar")]
    NotBipolar { index: usize, value: i64 },

    #[error("cannot bundle an empty list of hypervectors")]
    EmptyBundle,

    #[error("all bundling weights are zero")]
    ZeroWeights,

    #[error("invalid bundling weight {0}")]
    InvalidWeight(f64),

    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },

    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },

    #[error("class {class} has {count} samples; stratified split needs at least 2")]
    ClassTooSmall { class: usize, count: usize },

    #[error("validation set is empty")]
    EmptyValidation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid corruption spec `{spec}`: {reason}")]
    InvalidCorruption { spec: String, reason: String },

    #[error("shape has no foreground pixels")]
    EmptyShape,

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("{}: {reason} (offset {offset})", path.display())]
    Idx {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("model container: {0}")]
    Container(String),

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
}
