use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("need at least 2 frames, found {found}")]
    InsufficientFrames { found: usize },

    #[error("parse error{}: {message}", .path.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("block size {block} does not divide frame {width}x{height}")]
    BlockSize {
        block: usize,
        width: usize,
        height: usize,
    },

    #[error("code matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("rectangle out of bounds: {0}")]
    OutOfBounds(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("compressed template {index} has vanishing norm {norm:e}")]
    RankDeficiency { index: usize, norm: f64 },

    #[error("empty sequence")]
    EmptySequence,

    #[error("sequence length {actual} does not match expected length {expected}")]
    Length { expected: usize, actual: usize },

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("label {0:?} is not known to the model")]
    UnknownLabel(String),

    #[error("frame source failed: {0}")]
    Stream(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn parse(path: Option<&std::path::Path>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.map(|p| p.to_path_buf()),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
