use std::fs;
use std::path::Path;

use agegan_e2e::Direction;
use agegan_edgemap::{LandmarkSet, StrokeClass};
use agegan_pipeline::ablate::ablate;
use agegan_pipeline::config::RunConfig;
use agegan_pipeline::embed::{embed, FallbackEmbedder};
use agegan_pipeline::infer::{infer, infer_prepared, write_artifacts, Models};
use agegan_pipeline::manifest::{ingest, split_by_age, AgeGroup};
use agegan_pipeline::preprocess::{preprocess, EdgeStore, PreprocessConfig};
use agegan_pipeline::toy::{generate_faces, synth_toy_data};
use agegan_pipeline::PipelineError;
use proptest::prelude::*;

#[path = "../../edgemap/tests/support/mod.rs"]
mod support;

use support::reference::{reference_canny, reference_contour, winding_number};

const HEADER: &str = "image,landmarks,x,y,w,h,age\n";

fn small_config() -> RunConfig {
    RunConfig {
        gen_width: 4,
        disc_width: 4,
        residual_blocks: 1,
        e2e_epochs: 1,
        e2f_epochs: 2,
        ..RunConfig::default()
    }
}

fn toy_store(n: usize, seed: u64) -> (tempfile::TempDir, EdgeStore) {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(n, seed, dir.path()).unwrap();
    let store = preprocess(&ingest(&manifest).unwrap(), &PreprocessConfig::default()).unwrap();
    (dir, store)
}

#[test]
fn toy_landmark_files_hold_68_points() {
    let dir = tempfile::tempdir().unwrap();
    synth_toy_data(3, 1, dir.path()).unwrap();
    let mut n = 0;
    for f in fs::read_dir(dir.path().join("landmarks")).unwrap() {
        assert_eq!(LandmarkSet::load(f.unwrap().path()).unwrap().points().len(), 68);
        n += 1;
    }
    assert_eq!(n, 6);
}

#[test]
fn toy_corpus_is_seeded() {
    let a = generate_faces(3, 9).unwrap();
    let b = generate_faces(3, 9).unwrap();
    let c = generate_faces(3, 10).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x.image, x.age, &x.face_box), (&y.image, y.age, &y.face_box));
        assert_eq!(x.landmarks.points(), y.landmarks.points());
    }
    assert!(a.iter().zip(&c).any(|(x, y)| x.image != y.image));
    assert!(a.iter().all(|f| match f.group {
        AgeGroup::Young => f.age <= 28,
        AgeGroup::Old => f.age >= 60,
    }));
}

#[test]
fn old_faces_carry_twice_the_interior_strokes() {
    let (_dir, store) = toy_store(30, 7);
    let mean = |g| {
        let e = store.by_group(g);
        e.iter().map(|p| p.edge.interior_count() as f64).sum::<f64>() / e.len() as f64
    };
    let (young, old) = (mean(AgeGroup::Young), mean(AgeGroup::Old));
    assert!(old > 2.0 * young, "old {old} young {young}");
}

#[test]
fn empty_manifest_reports_zero_entries() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    fs::write(&p, HEADER).unwrap();
    let ds = ingest(&p).unwrap();
    assert!(ds.samples.is_empty());
    assert!(ds.report().starts_with("0 entries"), "{}", ds.report());
}

#[test]
fn short_landmark_file_is_skipped_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(1, 3, dir.path()).unwrap();
    let lm = dir.path().join("landmarks/toy_0000_young.txt");
    let text = fs::read_to_string(&lm).unwrap();
    let short: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).take(67).collect();
    fs::write(&lm, short.join("\n")).unwrap();
    let ds = ingest(&manifest).unwrap();
    assert_eq!(ds.samples.len(), 1);
    assert_eq!(ds.skipped.len(), 1);
    assert!(ds.skipped[0].reason.contains("landmark count"), "{}", ds.skipped[0].reason);
    assert_eq!(ds.skipped[0].line, 2);
}

#[test]
fn missing_file_is_listed_and_malformed_row_fails_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(1, 3, dir.path()).unwrap();
    let mut text = fs::read_to_string(&manifest).unwrap();
    text.push_str("images/nope.png,landmarks/nope.txt,0,0,10,10,30\n");
    fs::write(&manifest, &text).unwrap();
    let ds = ingest(&manifest).unwrap();
    assert_eq!((ds.samples.len(), ds.skipped.len()), (2, 1));
    assert!(ds.report().contains("line 4: missing file"), "{}", ds.report());

    text.push_str("a.png,a.txt,0,0,ten,10,30\n");
    fs::write(&manifest, &text).unwrap();
    let err = ingest(&manifest).unwrap_err();
    assert!(matches!(err, PipelineError::Data(_)));
    assert!(err.to_string().contains("line 5"), "{err}");
}

#[test]
fn toy_manifest_round_trips_with_labels() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(20, 4, dir.path()).unwrap();
    let ds = ingest(&manifest).unwrap();
    assert_eq!(ds.samples.len(), 40);
    assert!(ds.skipped.is_empty());
    let (young, old, excluded) = split_by_age(&ds.samples);
    assert_eq!((young.len(), old.len(), excluded.len()), (20, 20, 0));
    assert!(young.iter().all(|s| s.name().ends_with("_young")));
    assert!(old.iter().all(|s| s.name().ends_with("_old")));
}

#[test]
fn age_boundaries() {
    assert_eq!(AgeGroup::of(28), Some(AgeGroup::Young));
    assert_eq!(AgeGroup::of(60), Some(AgeGroup::Old));
    assert_eq!(AgeGroup::of(29), None);
    assert_eq!(AgeGroup::of(59), None);
    assert_eq!(AgeGroup::of(0), Some(AgeGroup::Young));
}

proptest! {
    #[test]
    fn split_by_age_is_a_partition(ages in proptest::collection::vec(0u32..100, 1..12)) {
        let dir = tempfile::tempdir().unwrap();
        let manifest = synth_toy_data(1, 0, dir.path()).unwrap();
        let text = fs::read_to_string(&manifest).unwrap();
        let row = text.lines().nth(1).unwrap();
        let prefix = &row[..row.rfind(',').unwrap()];
        let mut body = String::from(HEADER);
        for a in &ages {
            body.push_str(&format!("{prefix},{a}\n"));
        }
        fs::write(&manifest, body).unwrap();
        let ds = ingest(&manifest).unwrap();
        let (young, old, excluded) = split_by_age(&ds.samples);
        prop_assert_eq!(young.len() + old.len() + excluded.len(), ages.len());
        let lines = |v: &[&agegan_pipeline::manifest::Sample]| v.iter().map(|s| s.line).collect::<Vec<_>>();
        let expect = |f: &dyn Fn(u32) -> bool| {
            ages.iter().enumerate().filter(|(_, &a)| f(a)).map(|(i, _)| i + 2).collect::<Vec<_>>()
        };
        prop_assert_eq!(lines(&young), expect(&|a| a <= 28));
        prop_assert_eq!(lines(&old), expect(&|a| a >= 60));
        prop_assert_eq!(lines(&excluded), expect(&|a| a > 28 && a < 60));
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn preprocessing_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(3, 5, dir.path()).unwrap();
    let cfg = PreprocessConfig::default();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    preprocess(&ingest(&manifest).unwrap(), &cfg).unwrap().save(&a).unwrap();
    preprocess(&ingest(&manifest).unwrap(), &cfg).unwrap().save(&b).unwrap();
    let (x, y) = (dir_bytes(&a), dir_bytes(&b));
    assert_eq!(x.len(), 3 * 2 * 5 + 1);
    assert_eq!(x, y);
    assert_eq!(EdgeStore::load(&a).unwrap(), preprocess(&ingest(&manifest).unwrap(), &cfg).unwrap());
}

#[test]
fn stored_edge_maps_match_chained_oracles() {
    let (_dir, store) = toy_store(4, 11);
    let cfg = PreprocessConfig::default();
    for p in &store.entries {
        let gray = p.face.to_gray();
        let (w, h) = (gray.width(), gray.height());
        let canny = reference_canny(gray.pixels(), w, h, cfg.canny.sigma, cfg.canny.low, cfg.canny.high);
        let contour = reference_contour(p.landmarks.points(), w, h);
        let pts = p.landmarks.points();
        let mut poly: Vec<(f64, f64)> = pts[..17].to_vec();
        poly.extend(pts[17..27].iter().rev());
        for y in 0..h {
            for x in 0..w {
                let want = if contour[y][x] {
                    StrokeClass::Contour
                } else if canny[y][x] {
                    if winding_number(x as f64, y as f64, &poly) != 0 {
                        StrokeClass::InteriorCanny
                    } else {
                        StrokeClass::ExteriorCanny
                    }
                } else {
                    StrokeClass::Background
                };
                assert_eq!(p.edge.class_at(x, y), want, "{} at ({x}, {y})", p.name);
            }
        }
    }
}

#[test]
fn filter_flag_leaves_no_interior_canny() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(4, 6, dir.path()).unwrap();
    let cfg = PreprocessConfig {
        filter_interior: true,
        ..PreprocessConfig::default()
    };
    let store = preprocess(&ingest(&manifest).unwrap(), &cfg).unwrap();
    assert!(store.entries.iter().all(|p| p.edge.interior_count() == 0));
    assert!(store.entries.iter().any(|p| p.edge.count(StrokeClass::Contour) > 0));
}

#[test]
fn config_parses_and_rejects() {
    let cfg = RunConfig::parse("# run\nseed = 3\n\ne2e_lr = 0.001\nfilter_interior = true\nearly_stop = 0.5\n").unwrap();
    assert_eq!((cfg.seed, cfg.e2e_lr, cfg.filter_interior, cfg.early_stop), (3, 0.001, true, Some(0.5)));
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);

    for (text, needle) in [
        ("seed = 1\nbogus = 2\n", "line 2: unknown key bogus"),
        ("seed = 1\nseed = 2\n", "line 2: duplicate key seed"),
        ("seed = x\n", "line 1: invalid value for seed"),
        ("seed\n", "line 1: expected key = value"),
        ("image_size = 60\n", "multiple of 8"),
        ("lambda_cyc = -1\n", "lambda_cyc"),
        ("filter_interior = maybe\n", "true or false"),
        ("dropout = 1.0\n", "dropout"),
    ] {
        let err = RunConfig::parse(text).unwrap_err();
        assert!(matches!(err, PipelineError::Config(_)));
        assert!(err.to_string().contains(needle), "{text:?}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn fallback_embeddings_are_deterministic_and_distinct() {
    let (_dir, store) = toy_store(5, 12);
    let embedder = FallbackEmbedder::default();
    let all: Vec<_> = store.entries.iter().map(|p| embed(p, &embedder).unwrap()).collect();
    for (p, e) in store.entries.iter().zip(&all) {
        assert_eq!(&embed(p, &embedder).unwrap(), e);
        assert!((e.norm() - 1.0).abs() < 1e-5);
        assert_eq!(e.source(), agegan_e2f::EmbeddingSource::Fallback);
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            assert!(all[i].cosine(&all[j]) < 0.99, "{i} {j}: {}", all[i].cosine(&all[j]));
        }
    }
}

#[test]
fn embedding_file_wins_and_is_normalized() {
    let (dir, store) = toy_store(1, 13);
    let path = dir.path().join("emb.txt");
    let v = 4.0 / (512f64).sqrt();
    fs::write(&path, vec![v.to_string(); 512].join(" ")).unwrap();
    let mut p = store.entries[0].clone();
    p.embedding = Some(path.clone());
    let e = embed(&p, &FallbackEmbedder::default()).unwrap();
    assert_eq!(e.source(), agegan_e2f::EmbeddingSource::File);
    assert!((e.norm() - 1.0).abs() < 1e-5);

    fs::write(&path, "1 2 3").unwrap();
    let err = embed(&p, &FallbackEmbedder::default()).unwrap_err().to_string();
    assert!(err.contains("emb.txt"), "{err}");
}

#[test]
fn untrained_chain_completes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_toy_data(2, 14, dir.path()).unwrap();
    let ds = ingest(&manifest).unwrap();
    let cfg = small_config();
    let models = Models::untrained(&cfg).unwrap();
    let embedder = FallbackEmbedder::default();
    let s = &ds.samples[0];
    let run = || {
        infer(&s.image, &s.landmarks, &s.entry.face, None, Direction::YoungToOld, &models, &embedder, &cfg).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!((a.output.width(), a.output.height(), a.output.channels()), (64, 64, 3));
    assert_eq!(a.output, b.output);
    assert_eq!(a.translated, b.translated);
    assert!(a.translated.is_whitened());
    assert!(!a.input_edge.is_whitened() || a.input_edge.interior_count() == 0);

    let paths = write_artifacts(&a, &dir.path().join("out"), "face").unwrap();
    assert_eq!(paths.len(), 4);
    assert!(paths.iter().all(|p| p.is_file()));
}

#[test]
fn inference_leaves_the_store_untouched() {
    let (_dir, store) = toy_store(2, 15);
    let before = store.clone();
    let cfg = small_config();
    let models = Models::untrained(&cfg).unwrap();
    for p in &store.entries {
        infer_prepared(&p.face, &p.landmarks, &p.edge, None, Direction::OldToYoung, &models, &FallbackEmbedder::default())
            .unwrap();
    }
    assert_eq!(store, before);
}

#[test]
fn mismatched_checkpoints_fail_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config();
    Models::untrained(&cfg).unwrap().save(dir.path()).unwrap();
    assert!(Models::load(&cfg, dir.path()).is_ok());
    let wider = RunConfig {
        gen_width: 8,
        ..cfg
    };
    assert!(Models::load(&wider, dir.path()).is_err());
}

#[test]
fn ablation_runs_both_models_with_equal_budgets() {
    let (dir, store) = toy_store(2, 16);
    let cfg = small_config();
    let mut seen = Vec::new();
    let report = ablate(&store, &cfg, &FallbackEmbedder::default(), |which, m| seen.push((which, m.epoch))).unwrap();
    assert_eq!(report.metrics_a.len(), cfg.e2f_epochs);
    assert_eq!(report.metrics_b.len(), cfg.e2f_epochs);
    assert_eq!(seen, vec![('A', 1), ('A', 2), ('B', 1), ('B', 2)]);
    assert_eq!(report.b_interior_pixels, 0);
    assert!(store.entries.iter().any(|p| p.edge.interior_count() > 0));
    let out = dir.path().join("ablate");
    report.write(&out).unwrap();
    let a = fs::read_to_string(out.join("ablation_A.csv")).unwrap();
    let b = fs::read_to_string(out.join("ablation_B.csv")).unwrap();
    assert_eq!(a.lines().count(), b.lines().count());
    assert_eq!(a.lines().next(), b.lines().next());
    assert!(out.join("ablation_grid.png").is_file());
    assert_eq!(report.grid.width(), 5 * 64);
}
