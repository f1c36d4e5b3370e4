//! Edge-to-face synthesis: a 4-channel (edge map plus tiled identity)
//! conditional generator trained against two-scale PatchGANs with
//! feature matching.

pub mod embedding;
pub mod error;
pub mod losses;
pub mod nets;
pub mod tile;
pub mod train;

pub use embedding::{EmbeddingSource, IdentityEmbedding, EMBEDDING_DIM};
pub use error::{E2fError, Result};
pub use losses::{e2f_losses, generator_objective, E2fLosses, DEFAULT_LAMBDA_FM};
pub use nets::{e2f_generator_config, E2FGenerator, MultiScaleDiscriminator, CONDITION_CHANNELS, FACE_CHANNELS};
pub use tile::{make_conditional_input, read_back, tile_identity};
pub use train::{
    metrics_csv, synthesize_face, train_epoch_e2f, E2fConfig, E2fMetrics, E2fModel, Triple, METRICS_HEADER,
};

pub type E2fModel32 = E2fModel<f32>;
