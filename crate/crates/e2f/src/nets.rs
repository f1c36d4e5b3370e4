use agegan_core::{Scalar, Tape, Var};
use agegan_e2e::{DiscOutput, DiscriminatorConfig, DiscriminatorNet, GeneratorConfig, GeneratorNet};
use rand::Rng;

use crate::error::Result;

pub const CONDITION_CHANNELS: usize = 4;
pub const FACE_CHANNELS: usize = 3;

/// Generator config for 4-channel conditional input and RGB output.
pub fn e2f_generator_config(widths: [usize; 3], residual_blocks: usize, dropout: f64) -> GeneratorConfig {
    GeneratorConfig {
        in_channels: CONDITION_CHANNELS,
        out_channels: FACE_CHANNELS,
        widths,
        residual_blocks,
        dropout,
    }
}

pub type E2FGenerator<T> = GeneratorNet<T>;

/// PatchGANs at full and half resolution over the condition concatenated
/// with a face.
#[derive(Clone, Debug)]
pub struct MultiScaleDiscriminator<T: Scalar> {
    pub scales: Vec<DiscriminatorNet<T>>,
}

impl<T: Scalar> MultiScaleDiscriminator<T> {
    pub fn new(name: &str, widths: [usize; 3], rng: &mut impl Rng) -> Result<Self> {
        let config = DiscriminatorConfig {
            in_channels: CONDITION_CHANNELS + FACE_CHANNELS,
            widths,
        };
        let scales = (0..2)
            .map(|i| DiscriminatorNet::new(&format!("{name}{i}"), config.clone(), rng))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { scales })
    }

    /// One output per scale, full resolution first.
    pub fn forward(&self, tape: &mut Tape<T>, condition: Var, face: Var) -> Result<Vec<DiscOutput>> {
        let joint = tape.concat_channels(&[condition, face])?;
        let mut input = joint;
        let mut outs = Vec::with_capacity(self.scales.len());
        for (i, d) in self.scales.iter().enumerate() {
            if i > 0 {
                input = tape.avg_pool2(input)?;
            }
            outs.push(d.forward(tape, input)?);
        }
        Ok(outs)
    }
}
