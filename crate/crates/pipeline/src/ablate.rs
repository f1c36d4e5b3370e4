//! Interior-canny ablation: two face generators trained with identical
//! budgets, one on full edge maps (A) and one on maps with every interior
//! canny pixel erased (B).

use std::fs;
use std::path::Path;

use agegan_e2f::{metrics_csv, synthesize_face, E2fMetrics, E2fModel};
use agegan_edgemap::{filter_interior_canny, save_image, EdgeMap, Image};

use crate::config::RunConfig;
use crate::embed::{embed, FallbackEmbedder};
use crate::error::{PipelineError, Result};
use crate::infer::grid;
use crate::preprocess::{EdgeStore, Prepared};
use crate::train::{e2f_triples, train_e2f_on};

/// Rows of the comparison grid.
pub const GRID_ROWS: usize = 4;

#[derive(Clone, Debug)]
pub struct AblationReport {
    pub metrics_a: Vec<E2fMetrics>,
    pub metrics_b: Vec<E2fMetrics>,
    /// Interior-canny pixels across every map model B trained on.
    pub b_interior_pixels: usize,
    /// Per row: face, map A, output A, map B, output B.
    pub grid: Image,
}

impl AblationReport {
    pub fn final_l1(&self) -> (f64, f64) {
        let last = |m: &[E2fMetrics]| m.last().map_or(f64::NAN, |r| r.train_l1);
        (last(&self.metrics_a), last(&self.metrics_b))
    }

    pub fn summary(&self) -> String {
        let (a, b) = self.final_l1();
        format!(
            "model,epochs,final_train_L1\nA,{},{a}\nB,{},{b}\n",
            self.metrics_a.len(),
            self.metrics_b.len()
        )
    }

    /// `ablation_A.csv`, `ablation_B.csv`, `ablation_summary.csv` and
    /// `ablation_grid.png` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
        for (file, text) in [
            ("ablation_A.csv", metrics_csv(&self.metrics_a)),
            ("ablation_B.csv", metrics_csv(&self.metrics_b)),
            ("ablation_summary.csv", self.summary()),
        ] {
            let p = dir.join(file);
            fs::write(&p, text).map_err(PipelineError::io(&p))?;
        }
        save_image(dir.join("ablation_grid.png"), &self.grid)?;
        Ok(())
    }
}

/// The store with every map passed through the interior filter.
pub fn filtered_store(store: &EdgeStore) -> EdgeStore {
    EdgeStore {
        entries: store
            .entries
            .iter()
            .map(|p| Prepared {
                edge: filter_interior_canny(&p.edge),
                ..p.clone()
            })
            .collect(),
    }
}

fn render(model: &E2fModel<f32>, p: &Prepared, edge: &EdgeMap, embedder: &FallbackEmbedder) -> Result<Image> {
    Ok(synthesize_face(edge, &embed(p, embedder)?, &model.generator)?)
}

/// Train both models from `store` (unfiltered) under `cfg`'s E2F settings.
pub fn ablate(
    store: &EdgeStore,
    cfg: &RunConfig,
    embedder: &FallbackEmbedder,
    mut on_epoch: impl FnMut(char, &E2fMetrics),
) -> Result<AblationReport> {
    if cfg.filter_interior {
        log::warn!("filter_interior is set; if the store was preprocessed with it, model A matches model B");
    }
    let store_b = filtered_store(store);
    let b_interior_pixels = store_b.entries.iter().map(|p| p.edge.interior_count()).sum();

    let triples_a = e2f_triples(&store.entries, embedder)?;
    let triples_b = e2f_triples(&store_b.entries, embedder)?;
    let (model_a, metrics_a) = train_e2f_on(&triples_a, cfg, |m| on_epoch('A', m))?;
    let (model_b, metrics_b) = train_e2f_on(&triples_b, cfg, |m| on_epoch('B', m))?;

    let mut rows = Vec::new();
    for (pa, pb) in store.entries.iter().zip(&store_b.entries).take(GRID_ROWS) {
        rows.push(vec![
            pa.face.clone(),
            pa.edge.image().clone(),
            render(&model_a, pa, &pa.edge, embedder)?,
            pb.edge.image().clone(),
            render(&model_b, pb, &pb.edge, embedder)?,
        ]);
    }
    Ok(AblationReport {
        metrics_a,
        metrics_b,
        b_interior_pixels,
        grid: grid(&rows)?,
    })
}
