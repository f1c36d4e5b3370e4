//! The two-stage aging chain: edge map, edge-to-edge translation, then
//! edge-to-face synthesis.

use std::fs;
use std::path::{Path, PathBuf};

use agegan_e2e::{CycleGan, Direction};
use agegan_e2f::{make_conditional_input, synthesize_face, E2fModel, IdentityEmbedding};
use agegan_edgemap::{colorize_interior_canny, save_image, BoundingBox, EdgeMap, Image, LandmarkSet};

use crate::config::RunConfig;
use crate::embed::FallbackEmbedder;
use crate::error::{PipelineError, Result};
use crate::preprocess::{crop_edge_map, face_crop};

pub const E2E_CHECKPOINT: &str = "e2e.ckpt";
pub const E2F_CHECKPOINT: &str = "e2f.ckpt";

/// Trained networks for both stages.
#[derive(Clone, Debug)]
pub struct Models {
    pub e2e: CycleGan<f32>,
    pub e2f: E2fModel<f32>,
}

impl Models {
    /// Fresh, untrained networks shaped by `cfg`.
    pub fn untrained(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            e2e: CycleGan::new(cfg.cycle())?,
            e2f: E2fModel::new(cfg.e2f())?,
        })
    }

    /// Load `e2e.ckpt` and `e2f.ckpt` from `dir`. Any mismatch with the
    /// shapes implied by `cfg` fails here, before inference starts.
    pub fn load(cfg: &RunConfig, dir: &Path) -> Result<Self> {
        let mut m = Self::untrained(cfg)?;
        m.e2e.load(dir.join(E2E_CHECKPOINT))?;
        m.e2f.load(dir.join(E2F_CHECKPOINT))?;
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
        self.e2e.save(dir.join(E2E_CHECKPOINT))?;
        self.e2f.save(dir.join(E2F_CHECKPOINT))?;
        Ok(())
    }
}

/// Every intermediate of one run of the chain.
#[derive(Clone, Debug)]
pub struct InferOutput {
    /// Resized face crop fed to the chain.
    pub face: Image,
    pub landmarks: LandmarkSet,
    /// Input edge map colored for the source domain.
    pub input_edge: EdgeMap,
    /// Translated map, WHITE.
    pub translated: EdgeMap,
    pub embedding: IdentityEmbedding,
    pub output: Image,
}

impl InferOutput {
    /// One row: input face, input edge map, translated edge map, output.
    pub fn grid_row(&self) -> Result<Image> {
        grid(&[vec![
            self.face.clone(),
            self.input_edge.image().clone(),
            self.translated.image().clone(),
            self.output.clone(),
        ]])
    }
}

/// Tile equally sized RGB images into rows and columns.
pub fn grid(rows: &[Vec<Image>]) -> Result<Image> {
    let first = rows
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| PipelineError::Data("cannot build an empty image grid".into()))?;
    let (w, h) = (first.width(), first.height());
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Image::filled(cols * w, rows.len() * h, 3, 0)?;
    for (r, row) in rows.iter().enumerate() {
        for (c, img) in row.iter().enumerate() {
            if (img.width(), img.height()) != (w, h) {
                return Err(PipelineError::Data(format!(
                    "grid cell {r},{c} is {}x{}, expected {w}x{h}",
                    img.width(),
                    img.height()
                )));
            }
            let img = img.to_rgb();
            for y in 0..h {
                for x in 0..w {
                    out.set_rgb(c * w + x, r * h + y, img.rgb(x, y));
                }
            }
        }
    }
    Ok(out)
}

/// Run the chain on a full image with its landmarks and face box.
///
/// The face is cropped and resized, its edge map is colored for the source
/// domain and translated, the WHITE result is paired with the identity
/// embedding and the face generator renders the output.
#[allow(clippy::too_many_arguments)]
pub fn infer(
    image: &Image,
    landmarks: &LandmarkSet,
    face_box: &BoundingBox,
    embedding_file: Option<&Path>,
    direction: Direction,
    models: &Models,
    embedder: &FallbackEmbedder,
    cfg: &RunConfig,
) -> Result<InferOutput> {
    let pre = cfg.preprocess();
    let (face, landmarks) = face_crop(image, landmarks, face_box, &pre)?;
    let edge = crop_edge_map(&face, &landmarks, &pre)?;
    infer_prepared(&face, &landmarks, &edge, embedding_file, direction, models, embedder)
}

/// The chain from an already cropped face and its WHITE edge map.
pub fn infer_prepared(
    face: &Image,
    landmarks: &LandmarkSet,
    edge: &EdgeMap,
    embedding_file: Option<&Path>,
    direction: Direction,
    models: &Models,
    embedder: &FallbackEmbedder,
) -> Result<InferOutput> {
    let input_edge = colorize_interior_canny(edge, direction.source_color());
    let translated = models.e2e.translate(edge, direction)?;
    let embedding = match embedding_file {
        Some(p) => IdentityEmbedding::load(p)?,
        None => embedder.embed(face)?,
    };
    // Build the conditional input explicitly so shape errors surface here.
    make_conditional_input::<f32>(&translated, &embedding)?;
    let output = synthesize_face(&translated, &embedding, &models.e2f.generator)?;
    Ok(InferOutput {
        face: face.clone(),
        landmarks: landmarks.clone(),
        input_edge,
        translated,
        embedding,
        output,
    })
}

/// Write `<name>_input_edge.png`, `<name>_translated_edge.png`,
/// `<name>_output.png` and `<name>_grid.png` under `dir`.
pub fn write_artifacts(out: &InferOutput, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
    let files = [
        (format!("{name}_input_edge.png"), out.input_edge.image().clone()),
        (format!("{name}_translated_edge.png"), out.translated.image().clone()),
        (format!("{name}_output.png"), out.output.clone()),
        (format!("{name}_grid.png"), out.grid_row()?),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (file, img) in files {
        let p = dir.join(file);
        save_image(&p, &img)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Interior-canny pixel count of a face crop, measured with the same
/// canny settings and landmark polygon as preprocessing.
pub fn interior_density(face: &Image, landmarks: &LandmarkSet, cfg: &RunConfig) -> Result<usize> {
    let pre = cfg.preprocess();
    let edge = agegan_edgemap::edge_map_for_crop(&face.to_gray(), landmarks, &pre.canny)?;
    Ok(edge.interior_count())
}
