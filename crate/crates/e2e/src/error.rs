use agegan_core::CoreError;
use agegan_edgemap::EdgeError;

#[derive(Debug, thiserror::Error)]
pub enum GanError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("non-finite {what} at epoch {epoch}, batch {batch}: {detail}")]
    NonFinite {
        what: String,
        epoch: usize,
        batch: usize,
        detail: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, GanError>;
