//! Residual encoder/decoder generator and PatchGAN discriminator.

use agegan_core::{ParamId, ParamSet, Scalar, Tape, Tensor, Var};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::error::{GanError, Result};

const NORM_EPS: f64 = 1e-5;
const INIT_STD: f64 = 0.02;
const LEAK: f64 = 0.2;

fn normal_tensor<T: Scalar>(shape: &[usize], rng: &mut impl Rng) -> Result<Tensor<T>> {
    let dist = Normal::new(0.0, INIT_STD).expect("valid std");
    Ok(Tensor::from_fn(shape.to_vec(), |_| T::from_f64_lossy(dist.sample(rng)))?)
}

#[derive(Clone, Copy, Debug)]
struct Conv {
    weight: ParamId,
    bias: Option<ParamId>,
    stride: usize,
    padding: usize,
    transpose: bool,
}

#[derive(Clone, Copy, Debug)]
struct ConvSpec {
    cin: usize,
    cout: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
    bias: bool,
    transpose: bool,
}

impl Conv {
    fn new<T: Scalar>(set: &mut ParamSet<T>, rng: &mut impl Rng, name: &str, s: ConvSpec) -> Result<Self> {
        let shape = if s.transpose {
            [s.cin, s.cout, s.kernel, s.kernel]
        } else {
            [s.cout, s.cin, s.kernel, s.kernel]
        };
        let weight = set.add(format!("{name}.weight"), normal_tensor(&shape, rng)?)?;
        let bias = if s.bias {
            Some(set.add(format!("{name}.bias"), Tensor::zeros([s.cout])?)?)
        } else {
            None
        };
        Ok(Self {
            weight,
            bias,
            stride: s.stride,
            padding: s.padding,
            transpose: s.transpose,
        })
    }

    fn apply<T: Scalar>(&self, tape: &mut Tape<T>, set: &ParamSet<T>, x: Var) -> Result<Var> {
        let w = tape.param(set, self.weight);
        let b = self.bias.map(|b| tape.param(set, b));
        Ok(if self.transpose {
            tape.conv_transpose2d(x, w, b, self.stride, self.padding)?
        } else {
            tape.conv2d(x, w, b, self.stride, self.padding)?
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct Norm {
    gamma: ParamId,
    beta: ParamId,
}

impl Norm {
    fn new<T: Scalar>(set: &mut ParamSet<T>, name: &str, channels: usize) -> Result<Self> {
        Ok(Self {
            gamma: set.add(format!("{name}.gamma"), Tensor::full([channels], T::one())?)?,
            beta: set.add(format!("{name}.beta"), Tensor::zeros([channels])?)?,
        })
    }

    fn apply<T: Scalar>(&self, tape: &mut Tape<T>, set: &ParamSet<T>, x: Var) -> Result<Var> {
        let g = tape.param(set, self.gamma);
        let b = tape.param(set, self.beta);
        Ok(tape.instance_norm(x, g, b, NORM_EPS)?)
    }
}

/// Conv followed by instance norm.
#[derive(Clone, Copy, Debug)]
struct ConvNorm {
    conv: Conv,
    norm: Norm,
}

impl ConvNorm {
    fn new<T: Scalar>(set: &mut ParamSet<T>, rng: &mut impl Rng, name: &str, s: ConvSpec) -> Result<Self> {
        Ok(Self {
            conv: Conv::new(set, rng, &format!("{name}.conv"), ConvSpec { bias: false, ..s })?,
            norm: Norm::new(set, &format!("{name}.norm"), s.cout)?,
        })
    }

    fn apply<T: Scalar>(&self, tape: &mut Tape<T>, set: &ParamSet<T>, x: Var) -> Result<Var> {
        let y = self.conv.apply(tape, set, x)?;
        self.norm.apply(tape, set, y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub in_channels: usize,
    pub out_channels: usize,
    /// Channels after the stem and after each downsampling conv.
    pub widths: [usize; 3],
    pub residual_blocks: usize,
    /// Dropout inside residual blocks during training; 0 disables it.
    pub dropout: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            in_channels: 3,
            out_channels: 3,
            widths: [32, 64, 128],
            residual_blocks: 4,
            dropout: 0.0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 || self.widths.contains(&0) {
            return Err(GanError::Config(format!("generator channel counts must be positive: {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(GanError::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct ResBlock {
    first: ConvNorm,
    second: ConvNorm,
}

/// Encoder (7×7 stem, two stride-2 convs), residual blocks, decoder (two
/// stride-2 transposed convs, 7×7 head) and a tanh output.
#[derive(Clone, Debug)]
pub struct GeneratorNet<T: Scalar> {
    pub config: GeneratorConfig,
    pub params: ParamSet<T>,
    stem: ConvNorm,
    down: [ConvNorm; 2],
    blocks: Vec<ResBlock>,
    up: [ConvNorm; 2],
    head: Conv,
}

impl<T: Scalar> GeneratorNet<T> {
    /// Parameter names are prefixed with `name.`.
    pub fn new(name: &str, config: GeneratorConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let mut set = ParamSet::new();
        let [w0, w1, w2] = config.widths;
        let spec = |cin, cout, kernel, stride, padding, transpose| ConvSpec {
            cin,
            cout,
            kernel,
            stride,
            padding,
            bias: false,
            transpose,
        };
        let stem = ConvNorm::new(&mut set, rng, &format!("{name}.stem"), spec(config.in_channels, w0, 7, 1, 3, false))?;
        let down = [
            ConvNorm::new(&mut set, rng, &format!("{name}.down0"), spec(w0, w1, 3, 2, 1, false))?,
            ConvNorm::new(&mut set, rng, &format!("{name}.down1"), spec(w1, w2, 3, 2, 1, false))?,
        ];
        let mut blocks = Vec::with_capacity(config.residual_blocks);
        for i in 0..config.residual_blocks {
            blocks.push(ResBlock {
                first: ConvNorm::new(&mut set, rng, &format!("{name}.res{i}.a"), spec(w2, w2, 3, 1, 1, false))?,
                second: ConvNorm::new(&mut set, rng, &format!("{name}.res{i}.b"), spec(w2, w2, 3, 1, 1, false))?,
            });
        }
        let up = [
            ConvNorm::new(&mut set, rng, &format!("{name}.up0"), spec(w2, w1, 4, 2, 1, true))?,
            ConvNorm::new(&mut set, rng, &format!("{name}.up1"), spec(w1, w0, 4, 2, 1, true))?,
        ];
        let head = Conv::new(
            &mut set,
            rng,
            &format!("{name}.head"),
            ConvSpec {
                bias: true,
                ..spec(w0, config.out_channels, 7, 1, 3, false)
            },
        )?;
        Ok(Self {
            config,
            params: set,
            stem,
            down,
            blocks,
            up,
            head,
        })
    }

    /// Forward pass on an `N × C × H × W` input with `H` and `W` divisible
    /// by 4. Dropout runs only when `train_rng` is given.
    pub fn forward(&self, tape: &mut Tape<T>, x: Var, mut train_rng: Option<&mut dyn RngCore>) -> Result<Var> {
        let shape = tape.shape(x).to_vec();
        if shape.len() != 4 || shape[1] != self.config.in_channels || shape[2] % 4 != 0 || shape[3] % 4 != 0 {
            return Err(GanError::Config(format!(
                "generator expects N x {} x H x W with H, W divisible by 4, got {shape:?}",
                self.config.in_channels
            )));
        }
        let p = &self.params;
        let mut h = self.stem.apply(tape, p, x)?;
        h = tape.relu(h);
        for layer in &self.down {
            h = layer.apply(tape, p, h)?;
            h = tape.relu(h);
        }
        for block in &self.blocks {
            let mut r = block.first.apply(tape, p, h)?;
            r = tape.relu(r);
            if self.config.dropout > 0.0 {
                if let Some(mut rng) = train_rng.as_deref_mut() {
                    r = tape.dropout(r, self.config.dropout, &mut rng)?;
                }
            }
            r = block.second.apply(tape, p, r)?;
            h = tape.add(h, r)?;
        }
        for layer in &self.up {
            h = layer.apply(tape, p, h)?;
            h = tape.relu(h);
        }
        let out = self.head.apply(tape, p, h)?;
        Ok(tape.tanh(out))
    }

    /// Inference on a single tensor, no dropout, no gradients.
    pub fn infer(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let mut tape = Tape::new();
        tape.freeze(&self.params);
        let x = tape.constant(input.clone());
        let y = self.forward(&mut tape, x, None)?;
        Ok(tape.value(y).clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminatorConfig {
    pub in_channels: usize,
    pub widths: [usize; 3],
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        Self {
            in_channels: 3,
            widths: [32, 64, 128],
        }
    }
}

/// Score grid plus the activations of each stride-2 block.
#[derive(Clone, Debug)]
pub struct DiscOutput {
    pub score: Var,
    pub features: Vec<Var>,
}

/// PatchGAN: three 4×4 stride-2 conv blocks with leaky ReLU (instance norm
/// on the last two), a 1×1 head and a sigmoid.
#[derive(Clone, Debug)]
pub struct DiscriminatorNet<T: Scalar> {
    pub config: DiscriminatorConfig,
    pub params: ParamSet<T>,
    first: Conv,
    rest: [ConvNorm; 2],
    head: Conv,
}

impl<T: Scalar> DiscriminatorNet<T> {
    pub fn new(name: &str, config: DiscriminatorConfig, rng: &mut impl Rng) -> Result<Self> {
        if config.in_channels == 0 || config.widths.contains(&0) {
            return Err(GanError::Config(format!("discriminator channel counts must be positive: {config:?}")));
        }
        let mut set = ParamSet::new();
        let [w0, w1, w2] = config.widths;
        let down = |cin, cout, bias| ConvSpec {
            cin,
            cout,
            kernel: 4,
            stride: 2,
            padding: 1,
            bias,
            transpose: false,
        };
        let first = Conv::new(&mut set, rng, &format!("{name}.block0"), down(config.in_channels, w0, true))?;
        let rest = [
            ConvNorm::new(&mut set, rng, &format!("{name}.block1"), down(w0, w1, false))?,
            ConvNorm::new(&mut set, rng, &format!("{name}.block2"), down(w1, w2, false))?,
        ];
        let head = Conv::new(
            &mut set,
            rng,
            &format!("{name}.head"),
            ConvSpec {
                cin: w2,
                cout: 1,
                kernel: 1,
                stride: 1,
                padding: 0,
                bias: true,
                transpose: false,
            },
        )?;
        Ok(Self {
            config,
            params: set,
            first,
            rest,
            head,
        })
    }

    /// Score grid of side `input / 8`; inputs must be at least 16 pixels
    /// and divisible by 8 so the grid has more than one cell.
    pub fn forward(&self, tape: &mut Tape<T>, x: Var) -> Result<DiscOutput> {
        let shape = tape.shape(x).to_vec();
        if shape.len() != 4
            || shape[1] != self.config.in_channels
            || shape[2] < 16
            || shape[3] < 16
            || shape[2] % 8 != 0
            || shape[3] % 8 != 0
        {
            return Err(GanError::Config(format!(
                "discriminator expects N x {} x H x W with H, W >= 16 and divisible by 8, got {shape:?}",
                self.config.in_channels
            )));
        }
        let p = &self.params;
        let mut features = Vec::with_capacity(3);
        let mut h = self.first.apply(tape, p, x)?;
        h = tape.leaky_relu(h, LEAK);
        features.push(h);
        for block in &self.rest {
            h = block.apply(tape, p, h)?;
            h = tape.leaky_relu(h, LEAK);
            features.push(h);
        }
        let logits = self.head.apply(tape, p, h)?;
        Ok(DiscOutput {
            score: tape.sigmoid(logits),
            features,
        })
    }

    pub fn score(&self, tape: &mut Tape<T>, x: Var) -> Result<Var> {
        Ok(self.forward(tape, x)?.score)
    }
}
