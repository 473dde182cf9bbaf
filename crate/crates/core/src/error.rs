use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index ({row}, {col}) out of range for {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("empty series")]
    EmptySeries,

    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("block length {block_length} leaves {blocks} block(s), need at least 2")]
    TooFewBlocks { block_length: usize, blocks: usize },

    #[error("configuration error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("chain failed at {point}: {message}")]
    Chain { point: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
