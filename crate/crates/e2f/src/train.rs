use std::fmt::Write as _;
use std::path::Path;

use agegan_core::{load_checkpoint, save_checkpoint, AdamConfig, AdamState, Scalar, Tape, Tensor};
use agegan_e2e::convert::{image_tensor, tensor_image};
use agegan_edgemap::{EdgeMap, Image};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::IdentityEmbedding;
use crate::error::{E2fError, Result};
use crate::losses::{e2f_losses, generator_objective, DEFAULT_LAMBDA_FM};
use crate::nets::{e2f_generator_config, E2FGenerator, MultiScaleDiscriminator};
use crate::tile::make_conditional_input;

#[derive(Clone, Debug, PartialEq)]
pub struct E2fConfig {
    pub lambda_fm: f64,
    /// Optional pixel L1 weight in the generator objective; 0 disables it.
    pub lambda_l1: f64,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub generator_widths: [usize; 3],
    pub residual_blocks: usize,
    pub dropout: f64,
    pub discriminator_widths: [usize; 3],
    /// Stop once an epoch's mean generator objective is at or below this.
    pub early_stop: Option<f64>,
}

impl Default for E2fConfig {
    fn default() -> Self {
        Self {
            lambda_fm: DEFAULT_LAMBDA_FM,
            lambda_l1: 0.0,
            adam: AdamConfig::default(),
            epochs: 200,
            batch_size: 1,
            seed: 0,
            generator_widths: [32, 64, 128],
            residual_blocks: 4,
            dropout: 0.0,
            discriminator_widths: [32, 64, 128],
            early_stop: None,
        }
    }
}

impl E2fConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_fm >= 0.0) || !(self.lambda_l1 >= 0.0) {
            return Err(E2fError::Config(format!(
                "loss weights must be >= 0, got lambda_fm={} lambda_l1={}",
                self.lambda_fm, self.lambda_l1
            )));
        }
        if !(self.adam.lr >= 0.0) {
            return Err(E2fError::Config(format!("learning rate must be >= 0, got {}", self.adam.lr)));
        }
        if self.batch_size == 0 {
            return Err(E2fError::Config("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Conditional input and target face as `1 × C × H × W` tensors.
#[derive(Clone, Debug)]
pub struct Triple<T> {
    pub condition: Tensor<T>,
    pub face: Tensor<T>,
}

impl<T: Scalar> Triple<T> {
    pub fn new(edge: &EdgeMap, embedding: &IdentityEmbedding, face: &Image) -> Result<Self> {
        if (face.width(), face.height()) != (edge.width(), edge.height()) || face.channels() != 3 {
            return Err(E2fError::Contract(format!(
                "face {}x{}x{} does not match edge map {}x{}",
                face.width(),
                face.height(),
                face.channels(),
                edge.width(),
                edge.height()
            )));
        }
        Ok(Self {
            condition: make_conditional_input(edge, embedding)?,
            face: image_tensor(face)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct E2fMetrics {
    pub epoch: usize,
    pub loss_d: f64,
    pub loss_g_adv: f64,
    pub loss_fm: f64,
    /// Mean `|G(c) - face|` on the `[-1, 1]` scale over the epoch's batches.
    pub train_l1: f64,
    pub loss_g_total: f64,
}

pub const METRICS_HEADER: &str = "epoch,loss_D,loss_G_adv,loss_FM,train_L1";

impl E2fMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.epoch, self.loss_d, self.loss_g_adv, self.loss_fm, self.train_l1
        )
    }
}

pub fn metrics_csv(rows: &[E2fMetrics]) -> String {
    let mut s = format!("{METRICS_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

#[derive(Clone, Debug)]
pub struct E2fModel<T: Scalar> {
    pub config: E2fConfig,
    pub generator: E2FGenerator<T>,
    pub discriminators: MultiScaleDiscriminator<T>,
    opt_g: AdamState<T>,
    opt_d: Vec<AdamState<T>>,
    rng: ChaCha8Rng,
    epochs_done: usize,
}

fn non_finite(what: &str, epoch: usize, batch: usize, detail: String) -> E2fError {
    E2fError::NonFinite {
        what: what.to_string(),
        epoch,
        batch,
        detail,
    }
}

impl<T: Scalar> E2fModel<T> {
    pub fn new(config: E2fConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let gcfg = e2f_generator_config(config.generator_widths, config.residual_blocks, config.dropout);
        let generator = E2FGenerator::new("e2f_gen", gcfg, &mut rng)?;
        let discriminators = MultiScaleDiscriminator::new("e2f_disc", config.discriminator_widths, &mut rng)?;
        Ok(Self {
            opt_g: AdamState::new(config.adam, &generator.params),
            opt_d: discriminators
                .scales
                .iter()
                .map(|d| AdamState::new(config.adam, &d.params))
                .collect(),
            config,
            generator,
            discriminators,
            rng,
            epochs_done: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut sets = vec![&self.generator.params];
        sets.extend(self.discriminators.scales.iter().map(|d| &d.params));
        Ok(save_checkpoint(path, &sets)?)
    }

    /// Load generator and discriminator weights; optimizer moments reset.
    pub fn load(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let mut sets = vec![&mut self.generator.params];
        sets.extend(self.discriminators.scales.iter_mut().map(|d| &mut d.params));
        load_checkpoint(path, &mut sets)?;
        self.opt_g = AdamState::new(self.config.adam, &self.generator.params);
        self.opt_d = self
            .discriminators
            .scales
            .iter()
            .map(|d| AdamState::new(self.config.adam, &d.params))
            .collect();
        Ok(())
    }

    /// One pass over `data`: a generator step, then a step for both
    /// discriminators on the detached output.
    pub fn train_epoch(&mut self, data: &[Triple<T>]) -> Result<E2fMetrics> {
        if data.is_empty() {
            return Err(E2fError::EmptyDataset("edge-to-face training needs at least one triple".into()));
        }
        let epoch = self.epochs_done + 1;
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);
        let b = self.config.batch_size;
        let steps = data.len().div_ceil(b);
        let mut sums = [0.0f64; 5];
        for step in 0..steps {
            let pick: Vec<usize> = (0..b).map(|k| order[(step * b + k) % order.len()]).collect();
            let cond = Tensor::stack_batch(&pick.iter().map(|&i| data[i].condition.clone()).collect::<Vec<_>>())?;
            let face = Tensor::stack_batch(&pick.iter().map(|&i| data[i].face.clone()).collect::<Vec<_>>())?;

            let mut tape = Tape::new();
            for d in &self.discriminators.scales {
                tape.freeze(&d.params);
            }
            let c = tape.constant(cond.clone());
            let real = tape.constant(face.clone());
            let fake = self
                .generator
                .forward(&mut tape, c, Some(&mut self.rng as &mut dyn RngCore))?;
            let losses = e2f_losses(&mut tape, &self.discriminators, c, real, fake)?;
            let l1 = tape.l1_loss(fake, real)?;
            let mut objective = generator_objective(&mut tape, &losses, self.config.lambda_fm)?;
            if self.config.lambda_l1 > 0.0 {
                let w = tape.scale(l1, T::from_f64_lossy(self.config.lambda_l1));
                objective = tape.add(objective, w)?;
            }
            let read = |t: &Tape<T>, v| t.value(v).data()[0].to_f64_lossy();
            let (v_obj, v_adv, v_fm, v_l1) = (
                read(&tape, objective),
                read(&tape, losses.loss_g_adv),
                read(&tape, losses.loss_fm),
                read(&tape, l1),
            );
            if !v_obj.is_finite() {
                return Err(non_finite(
                    "generator objective",
                    epoch,
                    step,
                    format!("adv={v_adv} fm={v_fm} l1={v_l1}"),
                ));
            }
            tape.backward(objective)?;
            self.generator.params.zero_grad();
            tape.accumulate_param_grads(&mut self.generator.params);
            self.opt_g.step(&mut self.generator.params)?;
            let fake_val = tape.value(fake).clone();
            drop(tape);

            let mut tape = Tape::new();
            let c = tape.constant(cond);
            let real = tape.constant(face);
            let fake = tape.constant(fake_val);
            let losses = e2f_losses(&mut tape, &self.discriminators, c, real, fake)?;
            let v_d = read(&tape, losses.loss_d);
            if !v_d.is_finite() {
                return Err(non_finite("loss_D", epoch, step, String::new()));
            }
            tape.backward(losses.loss_d)?;
            for (d, opt) in self.discriminators.scales.iter_mut().zip(&mut self.opt_d) {
                d.params.zero_grad();
                tape.accumulate_param_grads(&mut d.params);
                opt.step(&mut d.params)?;
            }
            for (s, v) in sums.iter_mut().zip([v_d, v_adv, v_fm, v_l1, v_obj]) {
                *s += v;
            }
        }
        self.epochs_done = epoch;
        let n = steps as f64;
        let m = E2fMetrics {
            epoch,
            loss_d: sums[0] / n,
            loss_g_adv: sums[1] / n,
            loss_fm: sums[2] / n,
            train_l1: sums[3] / n,
            loss_g_total: sums[4] / n,
        };
        log::info!("{}", m.csv_row());
        Ok(m)
    }

    /// Train for `config.epochs` epochs or until early stop.
    pub fn fit(&mut self, data: &[Triple<T>], mut on_epoch: impl FnMut(&E2fMetrics)) -> Result<Vec<E2fMetrics>> {
        let mut rows = Vec::with_capacity(self.config.epochs);
        for _ in 0..self.config.epochs {
            let m = self.train_epoch(data)?;
            on_epoch(&m);
            let stop = self.config.early_stop.is_some_and(|t| m.loss_g_total <= t);
            rows.push(m);
            if stop {
                break;
            }
        }
        Ok(rows)
    }

    /// Inference-mode generator output for a conditional input.
    pub fn generate(&self, condition: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.generator.infer(condition)?)
    }

    /// 8-bit RGB face for a WHITE edge map and an identity.
    pub fn synthesize_face(&self, edge: &EdgeMap, embedding: &IdentityEmbedding) -> Result<Image> {
        synthesize_face(edge, embedding, &self.generator)
    }
}

/// One epoch over a triple dataset.
pub fn train_epoch_e2f<T: Scalar>(data: &[Triple<T>], model: &mut E2fModel<T>) -> Result<E2fMetrics> {
    model.train_epoch(data)
}

pub fn synthesize_face<T: Scalar>(edge: &EdgeMap, embedding: &IdentityEmbedding, generator: &E2FGenerator<T>) -> Result<Image> {
    let cond = make_conditional_input(edge, embedding)?;
    let out = generator.infer(&cond)?;
    Ok(tensor_image(&out)?)
}
