//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion
//! and fails if any criterion fails.

use std::io::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use agegan_core::{op_suite, Tape, Tensor};
use agegan_e2e::{adversarial_loss, cycle_loss, full_objective, full_objective_var, DiscriminatorConfig, DiscriminatorNet};
use agegan_e2f::{
    e2f_losses, make_conditional_input, read_back, tile_identity, E2fModel, EmbeddingSource, IdentityEmbedding,
    MultiScaleDiscriminator, Triple, EMBEDDING_DIM,
};
use agegan_edgemap::{
    canny, colorize_interior_canny, compose_edge_map, decolorize, filter_interior_canny, CannyParams, EdgeMap, Image,
    Mask, StrokeColor, BLACK, GREEN, RED, WHITE,
};
use agegan_e2e::convert::tensor_image;
use agegan_e2e::Direction;
use agegan_pipeline::ablate::{ablate, filtered_store};
use agegan_pipeline::config::RunConfig;
use agegan_pipeline::embed::{embed, FallbackEmbedder};
use agegan_pipeline::infer::{infer, interior_density, Models};
use agegan_pipeline::manifest::{ingest, AgeGroup, Dataset};
use agegan_pipeline::preprocess::{preprocess, EdgeStore};
use agegan_pipeline::toy::synth_toy_data;
use agegan_pipeline::train::{e2f_triples, train_e2e, train_e2f_on};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../edgemap/tests/support/mod.rs"]
mod support;

const GRAD_TOL: f64 = 1e-3;
const GRAD_INSTANCES: usize = 20;
const GRAD_BUDGET: Duration = Duration::from_secs(120);
const CANNY_BUDGET: Duration = Duration::from_secs(60);
const LOSS_TOL: f64 = 1e-5;
const EQUILIBRIUM_TOL: f64 = 1e-6;
const CLOSURE_SEQUENCES: usize = 10_000;
const TRAIN_BUDGET: Duration = Duration::from_secs(30 * 60);
const CYCLE_TARGET: f64 = 0.05;
const DENSITY_SHARE: f64 = 0.8;
const OVERFIT_L1: f64 = 0.05;
const OVERFIT_EPOCHS: usize = 500;
const FACE_MAE: f64 = 13.0;

const TOY_SEED: u64 = 7;
const HELD_OUT_SEED: u64 = 1007;
const TRAIN_PER_GROUP: usize = 40;
const HELD_OUT_PER_GROUP: usize = 10;

/// Edge-to-edge settings for the toy corpus.
fn e2e_config() -> RunConfig {
    RunConfig {
        gen_width: 16,
        disc_width: 16,
        residual_blocks: 2,
        e2e_lr: 5e-4,
        lambda_cyc: 50.0,
        e2e_epochs: 200,
        ..RunConfig::default()
    }
}

/// Edge-to-face settings for the toy corpus.
fn e2f_config() -> RunConfig {
    RunConfig {
        gen_width: 8,
        disc_width: 8,
        residual_blocks: 2,
        e2f_lr: 1e-3,
        e2f_epochs: 60,
        ..RunConfig::default()
    }
}

/// Writes past the test harness's output capture so the lines always show.
fn line(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn record(results: &mut Vec<(usize, bool)>, id: usize, name: &str, start: Instant, o: Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    line(&format!("{tag} [{id}] {name}: {} ({:.1?})", o.detail, start.elapsed()));
    results.push((id, o.pass));
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let checks = match op_suite(GRAD_INSTANCES, &mut rng) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("suite error: {e}")),
    };
    let worst = checks.iter().map(|c| c.report.max_rel_error).fold(0.0, f64::max);
    let failing: Vec<&str> = checks.iter().filter(|c| !(c.report.max_rel_error < GRAD_TOL)).map(|c| c.op).collect();
    let few: Vec<&str> = checks.iter().filter(|c| c.instances < GRAD_INSTANCES).map(|c| c.op).collect();
    let elapsed = start.elapsed();
    outcome(
        failing.is_empty() && few.is_empty() && elapsed < GRAD_BUDGET,
        format!(
            "{} ops x {GRAD_INSTANCES} instances, worst rel err {worst:.2e}, failing {failing:?}, under-sampled {few:?}",
            checks.len()
        ),
    )
}

fn to_mask(grid: &[Vec<bool>]) -> Mask {
    let (h, w) = (grid.len(), grid[0].len());
    Mask::from_bits(w, h, grid.iter().flatten().copied().collect()).unwrap()
}

fn canny_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases: Vec<(String, Image, CannyParams)> = Vec::new();
    let step = Image::new(16, 16, 1, (0..256).map(|i| if i % 16 < 8 { 0 } else { 255 }).collect()).unwrap();
    let circle = Image::new(
        32,
        32,
        1,
        (0..32 * 32)
            .map(|i| {
                let (x, y) = ((i % 32) as f64 - 15.5, (i / 32) as f64 - 15.5);
                if x * x + y * y <= 100.0 {
                    255
                } else {
                    0
                }
            })
            .collect(),
    )
    .unwrap();
    let fixed = CannyParams {
        sigma: 1.0,
        low: 20.0,
        high: 60.0,
    };
    cases.push(("step".into(), step, fixed));
    cases.push(("circle".into(), circle, fixed));
    for i in 0..100 {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let px: Vec<u8> = if i % 2 == 0 {
            (0..w * h).map(|_| rng.random()).collect()
        } else {
            let (fx, fy) = (rng.random_range(0.05..0.8), rng.random_range(0.05..0.8));
            (0..w * h)
                .map(|k| (127.5 + 120.0 * ((k % w) as f64 * fx + (k / w) as f64 * fy).sin()) as u8)
                .collect()
        };
        let low = rng.random_range(0.0..80.0);
        let params = CannyParams {
            sigma: [0.6, 1.0, 1.4][i % 3],
            low,
            high: low + rng.random_range(0.0..150.0),
        };
        cases.push((format!("random {i}"), Image::new(w, h, 1, px).unwrap(), params));
    }
    let mut mismatched = Vec::new();
    for (name, img, p) in &cases {
        let got = canny(img, p).unwrap();
        let want = to_mask(&support::reference::reference_canny(img.pixels(), img.width(), img.height(), p.sigma, p.low, p.high));
        if got != want {
            mismatched.push(name.clone());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatched.is_empty() && elapsed < CANNY_BUDGET,
        format!("{} images, mismatched {mismatched:?}", cases.len()),
    )
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    Tensor::from_fn(shape.to_vec(), |_| rng.random_range(-1.0..1.0)).unwrap()
}

fn loss_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let disc_cfg = DiscriminatorConfig {
        widths: [4, 8, 8],
        ..DiscriminatorConfig::default()
    };
    let clamp = |v: f64| v.clamp(1e-7, 1.0 - 1e-7);
    let mut worst: f64 = 0.0;

    for _ in 0..5 {
        let d = DiscriminatorNet::<f64>::new("d", disc_cfg.clone(), &mut rng).unwrap();
        let mut tape = Tape::new();
        let real = tape.constant(random_tensor(&mut rng, &[2, 3, 24, 24]));
        let fake = tape.constant(random_tensor(&mut rng, &[2, 3, 24, 24]));
        let l = adversarial_loss(&mut tape, &d, real, fake).unwrap();
        let sr = d.score(&mut tape, real).unwrap();
        let sf = d.score(&mut tape, fake).unwrap();
        let (r, f) = (tape.value(sr).data().to_vec(), tape.value(sf).data().to_vec());
        let mut ld = 0.0;
        for &v in &r {
            ld -= clamp(v).ln() / r.len() as f64;
        }
        let mut lg = 0.0;
        for &v in &f {
            ld -= (1.0 - clamp(v)).ln() / f.len() as f64;
            lg -= clamp(v).ln() / f.len() as f64;
        }
        worst = worst.max((tape.value(l.loss_d).data()[0] - ld).abs());
        worst = worst.max((tape.value(l.loss_g).data()[0] - lg).abs());
    }

    for _ in 0..5 {
        let ts: Vec<Tensor<f64>> = (0..4).map(|_| random_tensor(&mut rng, &[2, 3, 7, 7])).collect();
        let mut tape = Tape::new();
        let v: Vec<_> = ts.iter().map(|t| tape.constant(t.clone())).collect();
        let c = cycle_loss(&mut tape, v[0], v[1], v[2], v[3]).unwrap();
        let mut want = 0.0;
        for (a, b) in [(0, 1), (2, 3)] {
            let mut s = 0.0;
            for i in 0..ts[a].numel() {
                s += (ts[a].data()[i] - ts[b].data()[i]).abs();
            }
            want += s / ts[a].numel() as f64;
        }
        worst = worst.max((tape.value(c).data()[0] - want).abs());
    }

    for _ in 0..3 {
        let d = MultiScaleDiscriminator::<f64>::new("m", [4, 8, 8], &mut rng).unwrap();
        let cond = random_tensor(&mut rng, &[1, 4, 32, 32]);
        let real = random_tensor(&mut rng, &[1, 3, 32, 32]);
        let fake = random_tensor(&mut rng, &[1, 3, 32, 32]);
        let mut tape = Tape::new();
        let (c, r, f) = (tape.constant(cond), tape.constant(real), tape.constant(fake));
        let fm = e2f_losses(&mut tape, &d, c, r, f).unwrap().loss_fm;
        let got = tape.value(fm).data()[0];
        let (out_r, out_f) = (d.forward(&mut tape, c, r).unwrap(), d.forward(&mut tape, c, f).unwrap());
        let mut taps = Vec::new();
        for (a, b) in out_r.iter().zip(&out_f) {
            for (&ta, &tb) in a.features.iter().zip(&b.features) {
                let (va, vb) = (tape.value(ta).data(), tape.value(tb).data());
                let mut s = 0.0;
                for i in 0..va.len() {
                    s += (va[i] - vb[i]).abs();
                }
                taps.push(s / va.len() as f64);
            }
        }
        worst = worst.max((got - taps.iter().sum::<f64>() / taps.len() as f64).abs());
    }

    let mut exact = true;
    for _ in 0..100 {
        let (a, b, c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let lambda = rng.random_range(0.0..100.0);
        let sum = a + b + lambda * c;
        let mut tape = Tape::<f64>::new();
        let (va, vb, vc) = (
            tape.constant(Tensor::scalar(a)),
            tape.constant(Tensor::scalar(b)),
            tape.constant(Tensor::scalar(c)),
        );
        let total = full_objective_var(&mut tape, va, vb, vc, lambda).unwrap();
        exact &= full_objective(a, b, c, lambda) == sum && tape.value(total).data()[0] == sum;
    }

    let mut d = DiscriminatorNet::<f64>::new("d", disc_cfg, &mut rng).unwrap();
    for p in d.params.iter_mut().filter(|p| p.name.starts_with("d.head")) {
        p.value.data_mut().fill(0.0);
    }
    let mut tape = Tape::new();
    let real = tape.constant(random_tensor(&mut rng, &[2, 3, 16, 16]));
    let fake = tape.constant(random_tensor(&mut rng, &[2, 3, 16, 16]));
    let l = adversarial_loss(&mut tape, &d, real, fake).unwrap();
    let eq = tape.value(l.loss_d).data()[0];
    let eq_err = (eq - 2.0 * std::f64::consts::LN_2).abs();

    outcome(
        worst < LOSS_TOL && exact && eq_err < EQUILIBRIUM_TOL,
        format!("worst oracle gap {worst:.2e}, objective sum exact {exact}, equilibrium loss_D {eq:.9}"),
    )
}

fn tiling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let e = IdentityEmbedding::new((0..EMBEDDING_DIM).map(|_| rng.random_range(-1.0..1.0)).collect(), EmbeddingSource::Raw)
        .unwrap();
    let map = tile_identity(&e, 256, 256).unwrap();
    let copies = map.chunks(EMBEDDING_DIM).filter(|c| *c == e.values()).count();
    let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let exact = bits(&read_back(&map).unwrap()) == bits(e.values());
    let side = 64;
    let (mut canny_mask, mut contour) = (Mask::new(side, side), Mask::new(side, side));
    for i in 8..56 {
        contour.set(i, 8, true);
        contour.set(8, i, true);
        canny_mask.set(i, 30, true);
    }
    let edge = compose_edge_map(&canny_mask, &contour, &[(8.0, 8.0), (56.0, 8.0), (56.0, 56.0), (8.0, 56.0)]).unwrap();
    let channels = make_conditional_input::<f32>(&edge, &e).unwrap().shape()[1];
    outcome(
        copies == 128 && map.len() == 128 * EMBEDDING_DIM && exact && channels == 4,
        format!("{copies} copies at 256x256, bit-exact read-back {exact}, conditional channels {channels}"),
    )
}

fn random_edge(rng: &mut ChaCha8Rng) -> EdgeMap {
    let (w, h) = (rng.random_range(4..=20), rng.random_range(4..=20));
    let (mut c, mut k) = (Mask::new(w, h), Mask::new(w, h));
    for y in 0..h {
        for x in 0..w {
            match rng.random_range(0..10) {
                0 => c.set(x, y, true),
                1 | 2 => k.set(x, y, true),
                _ => {}
            }
        }
    }
    let poly: Vec<(f64, f64)> = (0..rng.random_range(3..7))
        .map(|_| (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64)))
        .collect();
    compose_edge_map(&k, &c, &poly).unwrap()
}

fn closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let admissible = [BLACK, WHITE, RED, GREEN];
    let (mut inadmissible, mut unequal, mut invalid) = (0, 0, 0);
    for _ in 0..CLOSURE_SEQUENCES {
        let mut edge = random_edge(&mut rng);
        for _ in 0..rng.random_range(1..=6) {
            edge = match rng.random_range(0..4) {
                0 => colorize_interior_canny(&edge, StrokeColor::Red),
                1 => colorize_interior_canny(&edge, StrokeColor::Green),
                2 => decolorize(&edge),
                _ => filter_interior_canny(&edge),
            };
            let img = edge.image();
            if (0..edge.height()).any(|y| (0..edge.width()).any(|x| !admissible.contains(&img.rgb(x, y)))) {
                inadmissible += 1;
            }
            if edge.validate().is_err() {
                invalid += 1;
            }
            for color in [StrokeColor::Red, StrokeColor::Green] {
                if decolorize(&colorize_interior_canny(&edge, color)) != decolorize(&edge) {
                    unequal += 1;
                }
            }
        }
    }
    outcome(
        inadmissible + unequal + invalid == 0,
        format!(
            "{CLOSURE_SEQUENCES} sequences, inadmissible {inadmissible}, invalid {invalid}, decolorize mismatches {unequal}"
        ),
    )
}

struct Corpus {
    _dir: tempfile::TempDir,
    train: EdgeStore,
    held_out: Dataset,
    held_out_store: EdgeStore,
}

fn corpus() -> Corpus {
    let dir = tempfile::tempdir().unwrap();
    let pre = RunConfig::default().preprocess();
    let load = |sub: &str, n, seed| {
        let m = synth_toy_data(n, seed, &dir.path().join(sub)).unwrap();
        ingest(&m).unwrap()
    };
    let train_ds = load("train", TRAIN_PER_GROUP, TOY_SEED);
    let held_out = load("held_out", HELD_OUT_PER_GROUP, HELD_OUT_SEED);
    Corpus {
        train: preprocess(&train_ds, &pre).unwrap(),
        held_out_store: preprocess(&held_out, &pre).unwrap(),
        held_out,
        _dir: dir,
    }
}

fn share(hits: usize, total: usize) -> f64 {
    hits as f64 / total.max(1) as f64
}

fn e2e_convergence(c: &Corpus, models: &mut Models) -> Outcome {
    let start = Instant::now();
    let cfg = e2e_config();
    let (model, rows) = match train_e2e(&c.train, &cfg, |m| {
        if m.epoch % 20 == 0 {
            line(&format!("      e2e epoch {} loss_cyc {:.4}", m.epoch, m.loss_cyc));
        }
    }) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("training failed: {e}")),
    };
    let cyc = rows.last().map_or(f64::NAN, |r| r.loss_cyc);
    let young = c.held_out_store.by_group(AgeGroup::Young);
    let up = young
        .iter()
        .filter(|p| model.translate(&p.edge, Direction::YoungToOld).unwrap().interior_count() > p.edge.interior_count())
        .count();
    models.e2e = model;
    let elapsed = start.elapsed();
    outcome(
        cyc < CYCLE_TARGET && share(up, young.len()) >= DENSITY_SHARE && elapsed < TRAIN_BUDGET,
        format!(
            "{} epochs, final L_cyc {cyc:.4} (< {CYCLE_TARGET}), denser translation on {up}/{} held-out young maps",
            rows.len(),
            young.len()
        ),
    )
}

fn e2f_training(c: &Corpus, embedder: &FallbackEmbedder, models: &mut Models) -> Outcome {
    let start = Instant::now();
    let cfg = e2f_config();
    let triples = e2f_triples(&c.train.entries, embedder).unwrap();

    let single = &c.train.entries[0];
    let one = vec![Triple::new(&single.edge, &embed(single, embedder).unwrap(), &single.face).unwrap()];
    let mut overfit = E2fModel::<f32>::new(cfg.e2f()).unwrap();
    let (mut l1, mut epochs) = (f64::INFINITY, 0);
    while epochs < OVERFIT_EPOCHS && !(l1 < OVERFIT_L1) {
        l1 = overfit.train_epoch(&one).unwrap().train_l1;
        epochs += 1;
    }
    line(&format!("      e2f single triple: train L1 {l1:.4} after {epochs} epochs"));

    let (model, rows) = match train_e2f_on(&triples, &cfg, |m| {
        if m.epoch % 20 == 0 {
            line(&format!("      e2f epoch {} train L1 {:.4}", m.epoch, m.train_l1));
        }
    }) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("training failed: {e}")),
    };
    let mut mae = 0.0;
    for p in &c.train.entries {
        let out = model.synthesize_face(&p.edge, &embed(p, embedder).unwrap()).unwrap();
        mae += out.mean_abs_diff(&p.face).unwrap();
    }
    mae /= c.train.entries.len() as f64;
    models.e2f = model;
    let elapsed = start.elapsed();
    outcome(
        l1 < OVERFIT_L1 && mae < FACE_MAE && elapsed < TRAIN_BUDGET,
        format!(
            "single triple L1 {l1:.4} in {epochs} epochs; {} triples x {} epochs, mean abs pixel error {mae:.2}/255",
            triples.len(),
            rows.len()
        ),
    )
}

fn chain(c: &Corpus, embedder: &FallbackEmbedder, models: &Models) -> Outcome {
    let cfg = e2f_config();
    let pre = cfg.preprocess();
    let (mut exact, mut deterministic, mut up, mut total) = (true, true, 0, 0);
    for s in c.held_out.samples.iter().filter(|s| s.group() == Some(AgeGroup::Young)) {
        let run = || infer(&s.image, &s.landmarks, &s.entry.face, None, Direction::YoungToOld, models, embedder, &cfg);
        let (a, b) = (run().unwrap(), run().unwrap());
        deterministic &= a.output == b.output && a.translated == b.translated;

        let (face, lm) = agegan_pipeline::preprocess::face_crop(&s.image, &s.landmarks, &s.entry.face, &pre).unwrap();
        let edge = agegan_pipeline::preprocess::crop_edge_map(&face, &lm, &pre).unwrap();
        let colored = colorize_interior_canny(&edge, StrokeColor::Red);
        let translated = models.e2e.translate(&edge, Direction::YoungToOld).unwrap();
        let identity = embedder.embed(&face).unwrap();
        let cond = make_conditional_input::<f32>(&translated, &identity).unwrap();
        let out = tensor_image(&models.e2f.generator.infer(&cond).unwrap()).unwrap();
        exact &= a.input_edge == colored && a.translated == translated && a.embedding == identity && a.output == out;

        let before = interior_density(&face, &lm, &cfg).unwrap();
        let after = interior_density(&a.output, &lm, &cfg).unwrap();
        up += usize::from(after > before);
        total += 1;
    }
    outcome(
        exact && deterministic && share(up, total) >= DENSITY_SHARE,
        format!("sequence reproduced {exact}, deterministic {deterministic}, denser aged faces {up}/{total}"),
    )
}

fn ablation(c: &Corpus, embedder: &FallbackEmbedder, out: &Path) -> Outcome {
    let cfg = RunConfig {
        e2f_epochs: 10,
        ..e2f_config()
    };
    let store = EdgeStore {
        entries: c.train.entries.iter().take(12).cloned().collect(),
    };
    let report = match ablate(&store, &cfg, embedder, |_, _| {}) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("ablation failed: {e}")),
    };
    let written = report.write(out).is_ok();
    let read = |f: &str| std::fs::read_to_string(out.join(f)).unwrap_or_default();
    let (a, b) = (read("ablation_A.csv"), read("ablation_B.csv"));
    let comparable = a.lines().count() == cfg.e2f_epochs + 1
        && b.lines().count() == a.lines().count()
        && a.lines().next() == b.lines().next();
    let grid = out.join("ablation_grid.png").is_file();
    let recount: usize = filtered_store(&store).entries.iter().map(|p| p.edge.interior_count()).sum();
    let source: usize = store.entries.iter().map(|p| p.edge.interior_count()).sum();
    let (la, lb) = report.final_l1();
    outcome(
        written && comparable && grid && report.b_interior_pixels == 0 && recount == 0 && source > 0,
        format!(
            "{} epochs each, comparable CSVs {comparable}, grid {grid}, model B interior pixels {} (source maps {source}), final L1 A {la:.4} B {lb:.4}",
            cfg.e2f_epochs, report.b_interior_pixels
        ),
    )
}

#[test]
fn primary_criteria() {
    let mut results = Vec::new();
    let t = Instant::now();
    record(&mut results, 1, "gradient suite", t, gradient_suite());
    let t = Instant::now();
    record(&mut results, 2, "canny oracle", t, canny_oracle());
    let t = Instant::now();
    record(&mut results, 3, "loss algebra", t, loss_algebra());
    let t = Instant::now();
    record(&mut results, 4, "tiling fidelity", t, tiling());
    let t = Instant::now();
    record(&mut results, 5, "edge map closure", t, closure());

    let c = corpus();
    let embedder = FallbackEmbedder::default();
    let mut models = Models {
        e2e: Models::untrained(&e2e_config()).unwrap().e2e,
        e2f: Models::untrained(&e2f_config()).unwrap().e2f,
    };
    let t = Instant::now();
    record(&mut results, 6, "edge-to-edge toy convergence", t, e2e_convergence(&c, &mut models));
    let t = Instant::now();
    record(&mut results, 7, "edge-to-face training", t, e2f_training(&c, &embedder, &mut models));
    let t = Instant::now();
    record(&mut results, 8, "aging chain", t, chain(&c, &embedder, &models));
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    record(&mut results, 9, "ablation harness", t, ablation(&c, &embedder, dir.path()));

    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    line(&format!("{} of {} criteria passed", results.len() - failed.len(), results.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
