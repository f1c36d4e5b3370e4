use std::fmt::Write as _;
use std::path::Path;

use agegan_core::{load_checkpoint, save_checkpoint, AdamConfig, AdamState, Scalar, Tape, Tensor, Var};
use agegan_edgemap::EdgeMap;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convert::edge_tensor;
use crate::error::{GanError, Result};
use crate::losses::{adversarial_loss, cycle_loss, full_objective_var};
use crate::nets::{DiscriminatorConfig, DiscriminatorNet, GeneratorConfig, GeneratorNet};
use crate::pool::{ImagePool, DEFAULT_POOL_SIZE};

#[derive(Clone, Debug, PartialEq)]
pub struct CycleConfig {
    /// Weight of the cycle term.
    pub lambda_cyc: f64,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub image_size: usize,
    pub pool_size: usize,
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub discriminator: DiscriminatorConfig,
    /// Stop once an epoch's mean generator objective is at or below this.
    pub early_stop: Option<f64>,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            lambda_cyc: 10.0,
            adam: AdamConfig::default(),
            epochs: 200,
            batch_size: 1,
            image_size: 64,
            pool_size: DEFAULT_POOL_SIZE,
            seed: 0,
            generator: GeneratorConfig::default(),
            discriminator: DiscriminatorConfig::default(),
            early_stop: None,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cyc >= 0.0) {
            return Err(GanError::Config(format!("lambda_cyc must be >= 0, got {}", self.lambda_cyc)));
        }
        if !(self.adam.lr >= 0.0) {
            return Err(GanError::Config(format!("learning rate must be >= 0, got {}", self.adam.lr)));
        }
        if self.batch_size == 0 {
            return Err(GanError::Config("batch_size must be positive".into()));
        }
        if self.image_size < 16 || self.image_size % 8 != 0 {
            return Err(GanError::Config(format!(
                "image_size must be a multiple of 8 and at least 16, got {}",
                self.image_size
            )));
        }
        if self.generator.in_channels != 3 || self.generator.out_channels != 3 || self.discriminator.in_channels != 3 {
            return Err(GanError::Config("edge-to-edge networks work on 3-channel maps".into()));
        }
        self.generator.validate()
    }
}

/// Per-epoch running means.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss_g_total: f64,
    pub loss_d_x: f64,
    pub loss_d_y: f64,
    pub loss_cyc: f64,
    pub loss_gan_xy: f64,
    pub loss_gan_yx: f64,
}

pub const METRICS_HEADER: &str = "epoch,loss_G_total,loss_D_X,loss_D_Y,loss_cyc";

impl EpochMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.epoch, self.loss_g_total, self.loss_d_x, self.loss_d_y, self.loss_cyc
        )
    }
}

pub fn metrics_csv(rows: &[EpochMetrics]) -> String {
    let mut s = format!("{METRICS_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// The two generators (`g_xy`: young → old, `g_yx`: old → young), the two
/// discriminators, their optimizers and the fake pools.
#[derive(Clone, Debug)]
pub struct CycleGan<T: Scalar> {
    pub config: CycleConfig,
    pub g_xy: GeneratorNet<T>,
    pub g_yx: GeneratorNet<T>,
    pub d_x: DiscriminatorNet<T>,
    pub d_y: DiscriminatorNet<T>,
    opt_g_xy: AdamState<T>,
    opt_g_yx: AdamState<T>,
    opt_d_x: AdamState<T>,
    opt_d_y: AdamState<T>,
    pool_x: ImagePool<T>,
    pool_y: ImagePool<T>,
    rng: ChaCha8Rng,
    epochs_done: usize,
}

fn check_finite(value: f64, what: &str, epoch: usize, batch: usize, detail: impl FnOnce() -> String) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(GanError::NonFinite {
            what: what.to_string(),
            epoch,
            batch,
            detail: detail(),
        })
    }
}

impl<T: Scalar> CycleGan<T> {
    pub fn new(config: CycleConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let g_xy = GeneratorNet::new("gen_xy", config.generator.clone(), &mut rng)?;
        let g_yx = GeneratorNet::new("gen_yx", config.generator.clone(), &mut rng)?;
        let d_x = DiscriminatorNet::new("disc_x", config.discriminator.clone(), &mut rng)?;
        let d_y = DiscriminatorNet::new("disc_y", config.discriminator.clone(), &mut rng)?;
        Ok(Self {
            opt_g_xy: AdamState::new(config.adam, &g_xy.params),
            opt_g_yx: AdamState::new(config.adam, &g_yx.params),
            opt_d_x: AdamState::new(config.adam, &d_x.params),
            opt_d_y: AdamState::new(config.adam, &d_y.params),
            pool_x: ImagePool::new(config.pool_size),
            pool_y: ImagePool::new(config.pool_size),
            config,
            g_xy,
            g_yx,
            d_x,
            d_y,
            rng,
            epochs_done: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(save_checkpoint(
            path,
            &[&self.g_xy.params, &self.g_yx.params, &self.d_x.params, &self.d_y.params],
        )?)
    }

    /// Replace all four networks' weights from a checkpoint. Optimizer
    /// moments are reset.
    pub fn load(&mut self, path: impl AsRef<Path>) -> Result<()> {
        load_checkpoint(
            path,
            &mut [
                &mut self.g_xy.params,
                &mut self.g_yx.params,
                &mut self.d_x.params,
                &mut self.d_y.params,
            ],
        )?;
        self.opt_g_xy = AdamState::new(self.config.adam, &self.g_xy.params);
        self.opt_g_yx = AdamState::new(self.config.adam, &self.g_yx.params);
        self.opt_d_x = AdamState::new(self.config.adam, &self.d_x.params);
        self.opt_d_y = AdamState::new(self.config.adam, &self.d_y.params);
        Ok(())
    }

    fn batch(&self, data: &[Tensor<T>], order: &[usize], step: usize) -> Result<Tensor<T>> {
        let b = self.config.batch_size;
        let items: Vec<Tensor<T>> = (0..b)
            .map(|k| data[order[(step * b + k) % order.len()]].clone())
            .collect();
        Ok(Tensor::stack_batch(&items)?)
    }

    /// One pass over the longer domain (the shorter one wraps around).
    /// Per batch: a joint generator step on the full objective, then a
    /// D_X and a D_Y step on pooled fakes.
    pub fn train_epoch_tensors(&mut self, young: &[Tensor<T>], old: &[Tensor<T>]) -> Result<EpochMetrics> {
        if young.is_empty() || old.is_empty() {
            return Err(GanError::EmptyDataset(format!(
                "edge-to-edge training needs both domains, got {} young and {} old",
                young.len(),
                old.len()
            )));
        }
        let epoch = self.epochs_done + 1;
        let mut order_x: Vec<usize> = (0..young.len()).collect();
        let mut order_y: Vec<usize> = (0..old.len()).collect();
        order_x.shuffle(&mut self.rng);
        order_y.shuffle(&mut self.rng);
        let steps = young.len().max(old.len()).div_ceil(self.config.batch_size);
        let lambda = self.config.lambda_cyc;

        let mut sums = [0.0f64; 6];
        for step in 0..steps {
            let xb = self.batch(young, &order_x, step)?;
            let yb = self.batch(old, &order_y, step)?;

            // generators
            let mut tape = Tape::new();
            tape.freeze(&self.d_x.params);
            tape.freeze(&self.d_y.params);
            let x = tape.constant(xb.clone());
            let y = tape.constant(yb.clone());
            let fake_y = self.g_xy.forward(&mut tape, x, Some(&mut self.rng as &mut dyn RngCore))?;
            let rec_x = self.g_yx.forward(&mut tape, fake_y, Some(&mut self.rng as &mut dyn RngCore))?;
            let fake_x = self.g_yx.forward(&mut tape, y, Some(&mut self.rng as &mut dyn RngCore))?;
            let rec_y = self.g_xy.forward(&mut tape, fake_x, Some(&mut self.rng as &mut dyn RngCore))?;
            let adv_xy = adversarial_loss(&mut tape, &self.d_y, y, fake_y)?.loss_g;
            let adv_yx = adversarial_loss(&mut tape, &self.d_x, x, fake_x)?.loss_g;
            let cyc = cycle_loss(&mut tape, x, rec_x, y, rec_y)?;
            let total = full_objective_var(&mut tape, adv_xy, adv_yx, cyc, lambda)?;
            let read = |t: &Tape<T>, v: Var| t.value(v).data()[0].to_f64_lossy();
            let (v_total, v_xy, v_yx, v_cyc) = (read(&tape, total), read(&tape, adv_xy), read(&tape, adv_yx), read(&tape, cyc));
            check_finite(v_total, "generator objective", epoch, step, || {
                format!("gan_xy={v_xy} gan_yx={v_yx} cycle={v_cyc}")
            })?;
            tape.backward(total)?;
            self.g_xy.params.zero_grad();
            self.g_yx.params.zero_grad();
            tape.accumulate_param_grads(&mut self.g_xy.params);
            tape.accumulate_param_grads(&mut self.g_yx.params);
            self.opt_g_xy.step(&mut self.g_xy.params)?;
            self.opt_g_yx.step(&mut self.g_yx.params)?;
            let fake_y_val = tape.value(fake_y).clone();
            let fake_x_val = tape.value(fake_x).clone();
            drop(tape);

            // discriminators
            let pooled_y = self.pool_y.query(&fake_y_val, &mut self.rng)?;
            let loss_d_y = Self::discriminator_step(&mut self.d_y, &mut self.opt_d_y, &yb, pooled_y)?;
            check_finite(loss_d_y, "loss_D_Y", epoch, step, String::new)?;
            let pooled_x = self.pool_x.query(&fake_x_val, &mut self.rng)?;
            let loss_d_x = Self::discriminator_step(&mut self.d_x, &mut self.opt_d_x, &xb, pooled_x)?;
            check_finite(loss_d_x, "loss_D_X", epoch, step, String::new)?;

            for (s, v) in sums.iter_mut().zip([v_total, loss_d_x, loss_d_y, v_cyc, v_xy, v_yx]) {
                *s += v;
            }
        }
        self.epochs_done = epoch;
        let n = steps as f64;
        let m = EpochMetrics {
            epoch,
            loss_g_total: sums[0] / n,
            loss_d_x: sums[1] / n,
            loss_d_y: sums[2] / n,
            loss_cyc: sums[3] / n,
            loss_gan_xy: sums[4] / n,
            loss_gan_yx: sums[5] / n,
        };
        log::info!("{}", m.csv_row());
        Ok(m)
    }

    fn discriminator_step(
        d: &mut DiscriminatorNet<T>,
        opt: &mut AdamState<T>,
        real: &Tensor<T>,
        fake: Tensor<T>,
    ) -> Result<f64> {
        let mut tape = Tape::new();
        let r = tape.constant(real.clone());
        let f = tape.constant(fake);
        let loss = adversarial_loss(&mut tape, d, r, f)?.loss_d;
        tape.backward(loss)?;
        d.params.zero_grad();
        tape.accumulate_param_grads(&mut d.params);
        opt.step(&mut d.params)?;
        Ok(tape.value(loss).data()[0].to_f64_lossy())
    }

    /// Train for `config.epochs` epochs or until the early-stop threshold
    /// is reached. `on_epoch` sees every metrics row as it is produced.
    pub fn fit(
        &mut self,
        young: &[EdgeMap],
        old: &[EdgeMap],
        mut on_epoch: impl FnMut(&EpochMetrics),
    ) -> Result<Vec<EpochMetrics>> {
        let xs = young.iter().map(edge_tensor).collect::<Result<Vec<Tensor<T>>>>()?;
        let ys = old.iter().map(edge_tensor).collect::<Result<Vec<Tensor<T>>>>()?;
        let mut rows = Vec::with_capacity(self.config.epochs);
        for _ in 0..self.config.epochs {
            let m = self.train_epoch_tensors(&xs, &ys)?;
            on_epoch(&m);
            let stop = self.config.early_stop.is_some_and(|t| m.loss_g_total <= t);
            rows.push(m);
            if stop {
                log::info!("early stop after epoch {}", self.epochs_done);
                break;
            }
        }
        Ok(rows)
    }
}

/// One epoch over colored edge maps: young maps RED, old maps GREEN.
pub fn train_epoch<T: Scalar>(young: &[EdgeMap], old: &[EdgeMap], model: &mut CycleGan<T>) -> Result<EpochMetrics> {
    let xs = young.iter().map(edge_tensor).collect::<Result<Vec<Tensor<T>>>>()?;
    let ys = old.iter().map(edge_tensor).collect::<Result<Vec<Tensor<T>>>>()?;
    model.train_epoch_tensors(&xs, &ys)
}
