use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("face box does not intersect the image")]
    EmptyRoi,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("landmark count: expected 68 points, found {found}")]
    LandmarkCount { found: usize },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("edge map invariant violated: {0}")]
    Invariant(String),

    #[error("colored strokes present where a whitened edge map is required")]
    ColoredStrokes,

    #[error("png: {0}")]
    Png(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = EdgeError> = std::result::Result<T, E>;
