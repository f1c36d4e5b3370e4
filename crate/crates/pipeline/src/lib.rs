//! Toy data, manifest ingestion, preprocessing, training orchestration and
//! the inference chain behind the `agegan` binary.

pub mod ablate;
pub mod config;
pub mod embed;
pub mod error;
pub mod infer;
pub mod manifest;
pub mod preprocess;
pub mod toy;
pub mod train;

pub use error::{PipelineError, Result};
