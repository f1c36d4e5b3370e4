//! Minimal reverse-mode autodiff engine for image-to-image GANs.
//!
//! Everything numeric is generic over [`Scalar`]; training runs in `f32`
//! and gradient checks in `f64`. The aliases below name the two
//! instantiations.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod kernels;
pub mod losses;
pub mod param;
pub mod scalar;
pub mod tape;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use error::{CoreError, Result};
pub use gradcheck::{check_gradients, op_suite, GradCheckReport, OpCheck};
pub use losses::{discriminator_loss, gan_log_losses, generator_loss, GanLosses, SCORE_EPS};
pub use param::{ParamId, ParamSet, Parameter};
pub use scalar::Scalar;
pub use tape::{Activation, Tape, Var};
pub use tensor::Tensor;

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type Tape32 = Tape<f32>;
pub type Tape64 = Tape<f64>;
pub type ParamSet32 = ParamSet<f32>;
pub type ParamSet64 = ParamSet<f64>;
