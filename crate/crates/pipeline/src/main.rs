use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agegan_core::op_suite;
use agegan_e2e::Direction;
use agegan_edgemap::{load_image, BoundingBox, LandmarkSet};
use agegan_pipeline::ablate::ablate;
use agegan_pipeline::config::RunConfig;
use agegan_pipeline::embed::FallbackEmbedder;
use agegan_pipeline::infer::{infer, write_artifacts, Models};
use agegan_pipeline::manifest::{ingest, split_by_age, AgeGroup};
use agegan_pipeline::preprocess::{preprocess, EdgeStore};
use agegan_pipeline::toy::synth_toy_data;
use agegan_pipeline::train::{train_e2e, train_e2f};
use agegan_pipeline::{PipelineError, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Face aging through edge maps: edge-to-edge translation followed by
/// edge-to-face synthesis.
#[derive(Parser)]
#[command(name = "agegan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic young/old face corpus with a manifest.
    SynthToy {
        #[command(flatten)]
        common: Common,
        /// Faces per age group; defaults to the configured toy_per_group.
        #[arg(long)]
        per_group: Option<usize>,
    },
    /// Validate a manifest and report skipped entries.
    Ingest { manifest: PathBuf },
    /// Crop faces and build edge maps into a store directory.
    Preprocess {
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        filter_interior: bool,
    },
    /// Train the edge-to-edge CycleGAN on a preprocessed store.
    TrainE2e {
        store: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train the edge-to-face generator on a preprocessed store.
    TrainE2f {
        store: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Age (or rejuvenate) faces with trained models.
    Infer {
        #[command(flatten)]
        common: Common,
        /// Directory holding e2e.ckpt and e2f.ckpt.
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value = "young-to-old")]
        direction: String,
        /// Run on every source-group entry of this manifest.
        #[arg(long, conflicts_with_all = ["image", "landmarks", "face_box"])]
        manifest: Option<PathBuf>,
        #[arg(long, requires_all = ["landmarks", "face_box"])]
        image: Option<PathBuf>,
        #[arg(long)]
        landmarks: Option<PathBuf>,
        /// Face box as x,y,w,h.
        #[arg(long = "box")]
        face_box: Option<String>,
        #[arg(long)]
        embedding: Option<PathBuf>,
    },
    /// Train face generators on full and interior-filtered edge maps.
    Ablate {
        store: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-difference check of every differentiable op.
    Gradcheck {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

fn load_config(common: &Common, required: bool) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None if required => return Err(PipelineError::Config("--config is required for this command".into())),
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common) -> Result<PathBuf> {
    common
        .out
        .clone()
        .ok_or_else(|| PipelineError::Config("--out is required for this command".into()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(PipelineError::io(path))
}

fn parse_box(text: &str) -> Result<BoundingBox> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || PipelineError::Config(format!("--box must be x,y,w,h with integers, got {text:?}"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let x: i64 = parts[0].parse().map_err(|_| bad())?;
    let y: i64 = parts[1].parse().map_err(|_| bad())?;
    let w: usize = parts[2].parse().map_err(|_| bad())?;
    let h: usize = parts[3].parse().map_err(|_| bad())?;
    BoundingBox::new(x, y, w, h).map_err(|e| PipelineError::Config(format!("--box: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SynthToy { common, per_group } => {
            let cfg = load_config(&common, false)?;
            let n = per_group.unwrap_or(cfg.toy_per_group);
            if n == 0 {
                return Err(PipelineError::Config("--per-group must be at least 1".into()));
            }
            let manifest = synth_toy_data(n, cfg.seed, &out_dir(&common)?)?;
            println!("{}", manifest.display());
        }
        Command::Ingest { manifest } => {
            let ds = ingest(&manifest)?;
            let samples: Vec<_> = ds.samples.clone();
            let (young, old, excluded) = split_by_age(&samples);
            println!("{}", ds.report());
            println!("{} young, {} old, {} excluded", young.len(), old.len(), excluded.len());
        }
        Command::Preprocess {
            manifest,
            common,
            filter_interior,
        } => {
            let mut cfg = load_config(&common, false)?;
            cfg.filter_interior |= filter_interior;
            let ds = ingest(&manifest)?;
            let store = preprocess(&ds, &cfg.preprocess())?;
            let out = out_dir(&common)?;
            store.save(&out)?;
            println!("{} entries preprocessed into {}", store.entries.len(), out.display());
        }
        Command::TrainE2e { store, common } => {
            let cfg = load_config(&common, true)?;
            let out = out_dir(&common)?;
            fs::create_dir_all(&out).map_err(PipelineError::io(&out))?;
            let store = EdgeStore::load(&store)?;
            let (model, rows) = train_e2e(&store, &cfg, |m| log::info!("e2e {}", m.csv_row()))?;
            model.save(out.join(agegan_pipeline::infer::E2E_CHECKPOINT))?;
            write(&out.join("e2e_metrics.csv"), &agegan_e2e::metrics_csv(&rows))?;
            if let Some(last) = rows.last() {
                println!("{}\n{}", agegan_e2e::METRICS_HEADER, last.csv_row());
            }
        }
        Command::TrainE2f { store, common } => {
            let cfg = load_config(&common, true)?;
            let out = out_dir(&common)?;
            fs::create_dir_all(&out).map_err(PipelineError::io(&out))?;
            let store = EdgeStore::load(&store)?;
            let embedder = FallbackEmbedder::new(cfg.embedder_seed);
            let (model, rows) = train_e2f(&store, &cfg, &embedder, |m| log::info!("e2f {}", m.csv_row()))?;
            model.save(out.join(agegan_pipeline::infer::E2F_CHECKPOINT))?;
            write(&out.join("e2f_metrics.csv"), &agegan_e2f::metrics_csv(&rows))?;
            if let Some(last) = rows.last() {
                println!("{}\n{}", agegan_e2f::METRICS_HEADER, last.csv_row());
            }
        }
        Command::Infer {
            common,
            models,
            direction,
            manifest,
            image,
            landmarks,
            face_box,
            embedding,
        } => {
            let cfg = load_config(&common, true)?;
            let direction: Direction = direction.parse().map_err(|e: agegan_e2e::GanError| PipelineError::Config(e.to_string()))?;
            let out = out_dir(&common)?;
            let models = Models::load(&cfg, &models)?;
            let embedder = FallbackEmbedder::new(cfg.embedder_seed);
            if let Some(manifest) = manifest {
                let ds = ingest(&manifest)?;
                let source = match direction {
                    Direction::YoungToOld => AgeGroup::Young,
                    Direction::OldToYoung => AgeGroup::Old,
                };
                let mut n = 0;
                for s in ds.samples.iter().filter(|s| s.group() == Some(source)) {
                    let r = infer(
                        &s.image,
                        &s.landmarks,
                        &s.entry.face,
                        s.entry.embedding.as_deref(),
                        direction,
                        &models,
                        &embedder,
                        &cfg,
                    )?;
                    write_artifacts(&r, &out, &s.name())?;
                    n += 1;
                }
                println!("{n} faces written to {}", out.display());
            } else {
                let (Some(image), Some(landmarks), Some(face_box)) = (image, landmarks, face_box) else {
                    return Err(PipelineError::Config(
                        "infer needs --manifest or all of --image, --landmarks and --box".into(),
                    ));
                };
                let img = load_image(&image)?;
                let lm = LandmarkSet::load(&landmarks)?;
                let r = infer(&img, &lm, &parse_box(&face_box)?, embedding.as_deref(), direction, &models, &embedder, &cfg)?;
                let name = image.file_stem().map_or("face".into(), |s| s.to_string_lossy().into_owned());
                for p in write_artifacts(&r, &out, &name)? {
                    println!("{}", p.display());
                }
            }
        }
        Command::Ablate { store, common } => {
            let cfg = load_config(&common, true)?;
            let out = out_dir(&common)?;
            let store = EdgeStore::load(&store)?;
            let embedder = FallbackEmbedder::new(cfg.embedder_seed);
            let report = ablate(&store, &cfg, &embedder, |which, m| log::info!("model {which}: {}", m.csv_row()))?;
            report.write(&out)?;
            print!("{}", report.summary());
            println!("model B interior canny pixels: {}", report.b_interior_pixels);
        }
        Command::Gradcheck { seed, instances } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let checks = op_suite(instances, &mut rng)?;
            let mut failed = Vec::new();
            println!("op,instances,max_rel_error,status");
            for c in &checks {
                let ok = c.report.max_rel_error < 1e-3;
                println!(
                    "{},{},{:.3e},{}",
                    c.op,
                    c.instances,
                    c.report.max_rel_error,
                    if ok { "pass" } else { "fail" }
                );
                if !ok {
                    failed.push(c.op);
                }
            }
            if !failed.is_empty() {
                return Err(PipelineError::Numeric(format!("gradient check failed for {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[config]: {first}");
            return ExitCode::from(agegan_pipeline::error::EXIT_CONFIG as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
