use std::fs;
use std::path::Path;

use crate::error::{E2fError, Result};

pub const EMBEDDING_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingSource {
    File,
    Fallback,
    /// Built directly from values, e.g. in tests.
    Raw,
}

/// 512-D identity vector, unit L2 norm except for the all-zero test vector.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityEmbedding {
    values: Vec<f32>,
    source: EmbeddingSource,
}

impl IdentityEmbedding {
    /// Normalize `values` to unit length.
    pub fn new(values: Vec<f64>, source: EmbeddingSource) -> Result<Self> {
        if values.len() != EMBEDDING_DIM {
            return Err(E2fError::Contract(format!(
                "identity embedding needs {EMBEDDING_DIM} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(E2fError::Contract("identity embedding has non-finite values".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(E2fError::Contract("cannot normalize an all-zero embedding".into()));
        }
        Ok(Self {
            values: values.iter().map(|v| (v / norm) as f32).collect(),
            source,
        })
    }

    /// All-zero vector, for isolating the edge channels.
    pub fn zeros() -> Self {
        Self {
            values: vec![0.0; EMBEDDING_DIM],
            source: EmbeddingSource::Raw,
        }
    }

    /// Text file of 512 whitespace-separated decimals, normalized on load.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bad = |reason: String| E2fError::Embedding {
            path: path.to_path_buf(),
            reason,
        };
        let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let values = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("not a number: {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != EMBEDDING_DIM {
            return Err(bad(format!("expected {EMBEDDING_DIM} values, found {}", values.len())));
        }
        Self::new(values, EmbeddingSource::File).map_err(|e| bad(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let text: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        fs::write(path, text.join("\n") + "\n")
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }

    pub fn cosine(&self, other: &IdentityEmbedding) -> f64 {
        let dot: f64 = self.values.iter().zip(&other.values).map(|(&a, &b)| a as f64 * b as f64).sum();
        dot / (self.norm() * other.norm())
    }
}
