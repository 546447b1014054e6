use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to decode image {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: {left_name} is {left_w}x{left_h} but {right_name} is {right_w}x{right_h}")]
    DimensionMismatch {
        left_name: &'static str,
        left_w: usize,
        left_h: usize,
        right_name: &'static str,
        right_w: usize,
        right_h: usize,
    },

    #[error("image too small: {width}x{height} (minimum 3x3)")]
    TooSmall { width: usize, height: usize },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ground truth has no positive pixels")]
    EmptyGroundTruth,

    #[error("ground truth has no negative pixels")]
    FullGroundTruth,

    #[error("nothing to aggregate")]
    EmptyAggregate,

    #[error("dataset {root}: {reason}")]
    Dataset { root: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("sample {stem}: {source}")]
    Sample {
        stem: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn mismatch(
        left_name: &'static str,
        left: (usize, usize),
        right_name: &'static str,
        right: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            left_name,
            left_w: left.0,
            left_h: left.1,
            right_name,
            right_w: right.0,
            right_h: right.1,
        }
    }

    /// Attach a sample stem to an error raised while processing that sample.
    pub fn in_sample(self, stem: &str) -> Self {
        Error::Sample {
            stem: stem.to_string(),
            source: Box::new(self),
        }
    }
}
