//! Edge-to-edge CycleGAN: generators between young (X) and old (Y) face
//! edge maps, PatchGAN discriminators, fake pools and the training loop.

pub mod convert;
pub mod error;
pub mod losses;
pub mod nets;
pub mod pool;
pub mod train;
pub mod translate;

pub use error::{GanError, Result};
pub use losses::{adversarial_loss, cycle_loss, full_objective, full_objective_var};
pub use nets::{DiscOutput, DiscriminatorConfig, DiscriminatorNet, GeneratorConfig, GeneratorNet};
pub use pool::{ImagePool, DEFAULT_POOL_SIZE};
pub use train::{metrics_csv, train_epoch, CycleConfig, CycleGan, EpochMetrics, METRICS_HEADER};
pub use translate::{translate, Direction};

pub type CycleGan32 = CycleGan<f32>;
pub type GeneratorNet32 = GeneratorNet<f32>;
pub type DiscriminatorNet32 = DiscriminatorNet<f32>;
