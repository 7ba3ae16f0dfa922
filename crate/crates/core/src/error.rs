use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm embedding")]
    ZeroNorm,

    #[error("empty memory")]
    EmptyMemory,

    #[error("non-finite feature at t={t}")]
    NonFiniteFeature { t: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("score vector has {actual} classes, expected {expected}")]
    ClassCountMismatch { expected: usize, actual: usize },

    #[error("out-of-order timestep: expected {expected}, got {actual}")]
    OutOfOrder { expected: usize, actual: usize },

    #[error("empty stream")]
    EmptyStream,

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("empty ground truth set")]
    EmptyGroundTruth,

    #[error("unknown class names: {}", .0.join(", "))]
    UnknownClasses(Vec<String>),

    #[error("size mismatch for {path}: expected {expected} bytes, found {actual}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0} not found")]
    NotFound(String),

    #[error("manifest not found: {}", .0.display())]
    ManifestNotFound(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
