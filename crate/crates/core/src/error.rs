use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Config validation collected one or more offending fields.
    #[error("invalid experiment config: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid term (order {order}, lags {lags:?}): {reason}")]
    InvalidTerm {
        order: usize,
        lags: Vec<usize>,
        reason: String,
    },

    #[error("position {position} out of range for dimension {dimension}")]
    PositionOutOfRange { position: usize, dimension: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("regressor dimension overflows for order {order}, memory {memory}")]
    DimensionOverflow { order: usize, memory: usize },

    #[error("non-finite {what}")]
    NonFinite { what: &'static str },

    #[error("ratio undefined: zero denominator")]
    UndefinedRatio,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed trace at line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that originate in the filesystem rather than in the input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
