//! Dataset assembly and training for both stages.

use agegan_e2e::{CycleGan, EpochMetrics};
use agegan_e2f::{E2fMetrics, E2fModel, Triple};
use agegan_edgemap::EdgeMap;

use crate::config::RunConfig;
use crate::embed::{embed, FallbackEmbedder};
use crate::error::{PipelineError, Result};
use crate::manifest::AgeGroup;
use crate::preprocess::{EdgeStore, Prepared};

/// Young maps colored RED and old maps colored GREEN. Ages between the
/// groups are left out.
pub fn e2e_domains(store: &EdgeStore) -> (Vec<EdgeMap>, Vec<EdgeMap>) {
    let young = store.by_group(AgeGroup::Young).iter().map(|p| p.e2e_edge()).collect();
    let old = store.by_group(AgeGroup::Old).iter().map(|p| p.e2e_edge()).collect();
    (young, old)
}

pub fn train_e2e(
    store: &EdgeStore,
    cfg: &RunConfig,
    on_epoch: impl FnMut(&EpochMetrics),
) -> Result<(CycleGan<f32>, Vec<EpochMetrics>)> {
    let (young, old) = e2e_domains(store);
    if young.is_empty() || old.is_empty() {
        return Err(PipelineError::Data(format!(
            "edge-to-edge training needs both age groups, found {} young and {} old",
            young.len(),
            old.len()
        )));
    }
    let mut model = CycleGan::new(cfg.cycle())?;
    let rows = model.fit(&young, &old, on_epoch)?;
    Ok((model, rows))
}

/// One (WHITE edge map, identity, face) triple per entry, every age.
pub fn e2f_triples<'a>(
    entries: impl IntoIterator<Item = &'a Prepared>,
    embedder: &FallbackEmbedder,
) -> Result<Vec<Triple<f32>>> {
    entries
        .into_iter()
        .map(|p| Ok(Triple::new(&p.edge, &embed(p, embedder)?, &p.face)?))
        .collect()
}

pub fn train_e2f_on(
    triples: &[Triple<f32>],
    cfg: &RunConfig,
    on_epoch: impl FnMut(&E2fMetrics),
) -> Result<(E2fModel<f32>, Vec<E2fMetrics>)> {
    if triples.is_empty() {
        return Err(PipelineError::Data("edge-to-face training needs at least one entry".into()));
    }
    let mut model = E2fModel::new(cfg.e2f())?;
    let rows = model.fit(triples, on_epoch)?;
    Ok((model, rows))
}

pub fn train_e2f(
    store: &EdgeStore,
    cfg: &RunConfig,
    embedder: &FallbackEmbedder,
    on_epoch: impl FnMut(&E2fMetrics),
) -> Result<(E2fModel<f32>, Vec<E2fMetrics>)> {
    let triples = e2f_triples(&store.entries, embedder)?;
    train_e2f_on(&triples, cfg, on_epoch)
}
