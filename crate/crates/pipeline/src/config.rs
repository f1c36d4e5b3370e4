//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; unknown or repeated keys are errors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use agegan_core::AdamConfig;
use agegan_e2e::{CycleConfig, DiscriminatorConfig, GeneratorConfig};
use agegan_e2f::E2fConfig;
use agegan_edgemap::CannyParams;

use crate::error::{PipelineError, Result};
use crate::preprocess::PreprocessConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub image_size: usize,
    pub canny_sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub roi_factor: f64,
    pub lambda_cyc: f64,
    pub lambda_fm: f64,
    pub lambda_l1: f64,
    pub e2e_lr: f64,
    pub e2f_lr: f64,
    pub e2e_epochs: usize,
    pub e2f_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub pool_size: usize,
    pub filter_interior: bool,
    pub early_stop: Option<f64>,
    /// Base channel width; the encoder uses `w, 2w, 4w`.
    pub gen_width: usize,
    pub disc_width: usize,
    pub residual_blocks: usize,
    pub dropout: f64,
    pub toy_per_group: usize,
    pub embedder_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let canny = CannyParams::default();
        Self {
            image_size: 64,
            canny_sigma: canny.sigma,
            canny_low: canny.low,
            canny_high: canny.high,
            roi_factor: agegan_edgemap::ROI_FACTOR,
            lambda_cyc: 10.0,
            lambda_fm: agegan_e2f::DEFAULT_LAMBDA_FM,
            lambda_l1: 0.0,
            e2e_lr: AdamConfig::default().lr,
            e2f_lr: AdamConfig::default().lr,
            e2e_epochs: 200,
            e2f_epochs: 200,
            batch_size: 1,
            seed: 0,
            pool_size: agegan_e2e::DEFAULT_POOL_SIZE,
            filter_interior: false,
            early_stop: None,
            gen_width: 32,
            disc_width: 32,
            residual_blocks: 4,
            dropout: 0.0,
            toy_per_group: 100,
            embedder_seed: crate::embed::EMBEDDER_SEED,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| PipelineError::Config(format!("line {line}: invalid value for {key}: {raw:?}")))
}

fn parse_bool(key: &str, raw: &str, line: usize) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(PipelineError::Config(format!("line {line}: {key} must be true or false, got {raw:?}"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| PipelineError::Config(format!("line {line}: expected key = value, got {trimmed:?}")))?;
            if seen.iter().any(|k| k == key) {
                return Err(PipelineError::Config(format!("line {line}: duplicate key {key}")));
            }
            seen.push(key.to_string());
            match key {
                "image_size" => cfg.image_size = parse_value(key, value, line)?,
                "canny_sigma" => cfg.canny_sigma = parse_value(key, value, line)?,
                "canny_low" => cfg.canny_low = parse_value(key, value, line)?,
                "canny_high" => cfg.canny_high = parse_value(key, value, line)?,
                "roi_factor" => cfg.roi_factor = parse_value(key, value, line)?,
                "lambda_cyc" => cfg.lambda_cyc = parse_value(key, value, line)?,
                "lambda_fm" => cfg.lambda_fm = parse_value(key, value, line)?,
                "lambda_l1" => cfg.lambda_l1 = parse_value(key, value, line)?,
                "e2e_lr" => cfg.e2e_lr = parse_value(key, value, line)?,
                "e2f_lr" => cfg.e2f_lr = parse_value(key, value, line)?,
                "e2e_epochs" => cfg.e2e_epochs = parse_value(key, value, line)?,
                "e2f_epochs" => cfg.e2f_epochs = parse_value(key, value, line)?,
                "batch_size" => cfg.batch_size = parse_value(key, value, line)?,
                "seed" => cfg.seed = parse_value(key, value, line)?,
                "pool_size" => cfg.pool_size = parse_value(key, value, line)?,
                "filter_interior" => cfg.filter_interior = parse_bool(key, value, line)?,
                "early_stop" => {
                    cfg.early_stop = match value {
                        "" | "none" | "off" => None,
                        v => Some(parse_value(key, v, line)?),
                    }
                }
                "gen_width" => cfg.gen_width = parse_value(key, value, line)?,
                "disc_width" => cfg.disc_width = parse_value(key, value, line)?,
                "residual_blocks" => cfg.residual_blocks = parse_value(key, value, line)?,
                "dropout" => cfg.dropout = parse_value(key, value, line)?,
                "toy_per_group" => cfg.toy_per_group = parse_value(key, value, line)?,
                "embedder_seed" => cfg.embedder_seed = parse_value(key, value, line)?,
                _ => return Err(PipelineError::Config(format!("line {line}: unknown key {key}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.image_size < 16 || self.image_size % 8 != 0 {
            return fail(format!("image_size must be a multiple of 8 and at least 16, got {}", self.image_size));
        }
        if !(self.canny_sigma > 0.0) || !(self.canny_low >= 0.0) || !(self.canny_high >= self.canny_low) {
            return fail(format!(
                "canny needs sigma > 0 and 0 <= low <= high, got sigma={} low={} high={}",
                self.canny_sigma, self.canny_low, self.canny_high
            ));
        }
        if !(self.roi_factor >= 1.0) || !self.roi_factor.is_finite() {
            return fail(format!("roi_factor must be >= 1, got {}", self.roi_factor));
        }
        for (name, v) in [("lambda_cyc", self.lambda_cyc), ("lambda_fm", self.lambda_fm), ("lambda_l1", self.lambda_l1)] {
            if !(v >= 0.0) || !v.is_finite() {
                return fail(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        for (name, v) in [("e2e_lr", self.e2e_lr), ("e2f_lr", self.e2f_lr)] {
            if !(v >= 0.0) || !v.is_finite() {
                return fail(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if self.gen_width == 0 || self.disc_width == 0 {
            return fail("network widths must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if self.toy_per_group == 0 {
            return fail("toy_per_group must be positive".into());
        }
        if let Some(t) = self.early_stop {
            if !t.is_finite() {
                return fail(format!("early_stop must be finite, got {t}"));
            }
        }
        Ok(())
    }

    /// The config in the same text format `parse` accepts.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("image_size", self.image_size.to_string());
        kv("canny_sigma", self.canny_sigma.to_string());
        kv("canny_low", self.canny_low.to_string());
        kv("canny_high", self.canny_high.to_string());
        kv("roi_factor", self.roi_factor.to_string());
        kv("lambda_cyc", self.lambda_cyc.to_string());
        kv("lambda_fm", self.lambda_fm.to_string());
        kv("lambda_l1", self.lambda_l1.to_string());
        kv("e2e_lr", self.e2e_lr.to_string());
        kv("e2f_lr", self.e2f_lr.to_string());
        kv("e2e_epochs", self.e2e_epochs.to_string());
        kv("e2f_epochs", self.e2f_epochs.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("seed", self.seed.to_string());
        kv("pool_size", self.pool_size.to_string());
        kv("filter_interior", self.filter_interior.to_string());
        kv("early_stop", self.early_stop.map_or("none".into(), |t| t.to_string()));
        kv("gen_width", self.gen_width.to_string());
        kv("disc_width", self.disc_width.to_string());
        kv("residual_blocks", self.residual_blocks.to_string());
        kv("dropout", self.dropout.to_string());
        kv("toy_per_group", self.toy_per_group.to_string());
        kv("embedder_seed", self.embedder_seed.to_string());
        s
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            image_size: self.image_size,
            canny: CannyParams {
                sigma: self.canny_sigma,
                low: self.canny_low,
                high: self.canny_high,
            },
            roi_factor: self.roi_factor,
            filter_interior: self.filter_interior,
        }
    }

    fn widths(w: usize) -> [usize; 3] {
        [w, 2 * w, 4 * w]
    }

    pub fn cycle(&self) -> CycleConfig {
        CycleConfig {
            lambda_cyc: self.lambda_cyc,
            adam: AdamConfig {
                lr: self.e2e_lr,
                ..AdamConfig::default()
            },
            epochs: self.e2e_epochs,
            batch_size: self.batch_size,
            image_size: self.image_size,
            pool_size: self.pool_size,
            seed: self.seed,
            generator: GeneratorConfig {
                widths: Self::widths(self.gen_width),
                residual_blocks: self.residual_blocks,
                dropout: self.dropout,
                ..GeneratorConfig::default()
            },
            discriminator: DiscriminatorConfig {
                widths: Self::widths(self.disc_width),
                ..DiscriminatorConfig::default()
            },
            early_stop: self.early_stop,
        }
    }

    pub fn e2f(&self) -> E2fConfig {
        E2fConfig {
            lambda_fm: self.lambda_fm,
            lambda_l1: self.lambda_l1,
            adam: AdamConfig {
                lr: self.e2f_lr,
                ..AdamConfig::default()
            },
            epochs: self.e2f_epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            generator_widths: Self::widths(self.gen_width),
            residual_blocks: self.residual_blocks,
            dropout: self.dropout,
            discriminator_widths: Self::widths(self.disc_width),
            early_stop: self.early_stop,
        }
    }
}
