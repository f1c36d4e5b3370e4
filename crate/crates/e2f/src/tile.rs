use agegan_core::{Scalar, Tensor};
use agegan_edgemap::{edge_to_planes, EdgeMap};

use crate::embedding::{IdentityEmbedding, EMBEDDING_DIM};
use crate::error::{E2fError, Result};

/// Repeat the embedding row-major over a `height × width` map. Needs
/// `height * width` divisible by 512; 256×256 holds 128 copies.
pub fn tile_identity(embedding: &IdentityEmbedding, height: usize, width: usize) -> Result<Vec<f32>> {
    let n = height * width;
    if n == 0 || n % EMBEDDING_DIM != 0 {
        return Err(E2fError::Contract(format!(
            "tile_identity needs height * width divisible by {EMBEDDING_DIM}, got {height} x {width} = {n}"
        )));
    }
    Ok(embedding.values().iter().copied().cycle().take(n).collect())
}

/// The first 512 entries of a tiled map in row-major order.
pub fn read_back(map: &[f32]) -> Result<Vec<f32>> {
    if map.len() < EMBEDDING_DIM {
        return Err(E2fError::Contract(format!(
            "a tiled map holds at least {EMBEDDING_DIM} values, got {}",
            map.len()
        )));
    }
    Ok(map[..EMBEDDING_DIM].to_vec())
}

/// `1 × 4 × H × W`: the WHITE edge map in `[-1, 1]` followed by the tiled
/// identity channel (unscaled).
pub fn make_conditional_input<T: Scalar>(edge: &EdgeMap, embedding: &IdentityEmbedding) -> Result<Tensor<T>> {
    if !edge.is_whitened() {
        return Err(E2fError::Contract(
            "conditional input needs a whitened edge map; decolorize colored strokes first".into(),
        ));
    }
    let (h, w) = (edge.height(), edge.width());
    let identity = tile_identity(embedding, h, w)?;
    let data = edge_to_planes(edge)
        .into_iter()
        .chain(identity)
        .map(|v| T::from_f64_lossy(v as f64))
        .collect();
    Ok(Tensor::new([1, 4, h, w], data)?)
}
