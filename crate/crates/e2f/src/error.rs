use std::path::PathBuf;

use agegan_core::CoreError;
use agegan_e2e::GanError;
use agegan_edgemap::EdgeError;

#[derive(Debug, thiserror::Error)]
pub enum E2fError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Gan(#[from] GanError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("embedding file {path}: {reason}")]
    Embedding { path: PathBuf, reason: String },
    #[error("non-finite {what} at epoch {epoch}, batch {batch}: {detail}")]
    NonFinite {
        what: String,
        epoch: usize,
        batch: usize,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, E2fError>;
