use std::path::PathBuf;

use agegan_core::CoreError;
use agegan_e2e::GanError;
use agegan_e2f::E2fError;
use agegan_edgemap::EdgeError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Gan(#[from] GanError),
    #[error(transparent)]
    E2f(#[from] E2fError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipelineError {
        let path = path.into();
        move |source| PipelineError::Io { path, source }
    }

    /// Machine-readable category: `config`, `data` or `numeric`.
    pub fn reason_code(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Numeric(_) => "numeric",
            PipelineError::Core(CoreError::NonFinite(_))
            | PipelineError::Gan(GanError::Core(CoreError::NonFinite(_)))
            | PipelineError::E2f(E2fError::Core(CoreError::NonFinite(_))) => "numeric",
            PipelineError::Gan(GanError::NonFinite { .. }) | PipelineError::E2f(E2fError::NonFinite { .. }) => "numeric",
            PipelineError::Gan(GanError::Config(_)) | PipelineError::E2f(E2fError::Config(_)) => "config",
            _ => "data",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.reason_code() {
            "config" => EXIT_CONFIG,
            "numeric" => EXIT_NUMERIC,
            _ => EXIT_DATA,
        }
    }

    /// `error[<code>]: <message>` on one line.
    pub fn one_line(&self) -> String {
        let msg: String = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}]: {msg}", self.reason_code())
    }
}
