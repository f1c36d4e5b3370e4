//! Identity embeddings: from a file when the manifest names one, otherwise
//! a fixed random projection of the grayscale face crop.

use agegan_e2f::{EmbeddingSource, IdentityEmbedding, EMBEDDING_DIM};
use agegan_edgemap::Image;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PipelineError, Result};
use crate::preprocess::Prepared;

pub const EMBEDDER_SEED: u64 = 0x5eed_e3b0;
pub const EMBEDDER_SIDE: usize = 64;

/// `512 × 4096` Gaussian projection of a standardized 64×64 gray crop.
#[derive(Clone, Debug)]
pub struct FallbackEmbedder {
    seed: u64,
    matrix: Vec<f32>,
}

impl Default for FallbackEmbedder {
    fn default() -> Self {
        Self::new(EMBEDDER_SEED)
    }
}

impl FallbackEmbedder {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = EMBEDDING_DIM * EMBEDDER_SIDE * EMBEDDER_SIDE;
        let matrix = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self { seed, matrix }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn embed(&self, face: &Image) -> Result<IdentityEmbedding> {
        let mut gray = face.to_gray();
        if (gray.width(), gray.height()) != (EMBEDDER_SIDE, EMBEDDER_SIDE) {
            gray = gray.resize(EMBEDDER_SIDE, EMBEDDER_SIDE)?;
        }
        let px: Vec<f64> = gray.pixels().iter().map(|&v| v as f64).collect();
        let n = px.len() as f64;
        let mean = px.iter().sum::<f64>() / n;
        let std = (px.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if std == 0.0 {
            return Err(PipelineError::Data("cannot embed a constant face crop".into()));
        }
        let z: Vec<f64> = px.iter().map(|v| (v - mean) / std).collect();
        let values = self
            .matrix
            .chunks_exact(z.len())
            .map(|row| row.iter().zip(&z).map(|(&a, &b)| a as f64 * b).sum())
            .collect();
        Ok(IdentityEmbedding::new(values, EmbeddingSource::Fallback)?)
    }
}

/// The sample's embedding file if it has one, otherwise the fallback
/// projection of its face crop.
pub fn embed(sample: &Prepared, embedder: &FallbackEmbedder) -> Result<IdentityEmbedding> {
    match &sample.embedding {
        Some(path) => Ok(IdentityEmbedding::load(path)?),
        None => embedder.embed(&sample.face),
    }
}
