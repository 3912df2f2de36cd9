//! The two-headed attribute/embedding models, their losses, and training.

pub mod augment;
pub mod checkpoint;
pub mod conv;
pub mod linalg;
pub mod loss;
pub mod mining;
pub mod mlp;
pub mod optim;
pub mod pool;
pub mod train;

pub use augment::{augment, image_to_input, AugmentConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use conv::{conv_forward, conv_gradients, image_to_stack, ConvConfig, ConvParams};
pub use linalg::Mat;
pub use loss::{
    attribute_loss, combined_loss, gradients, triplet_loss, LossParts, MiningMode, TrainConfig,
    Triplet,
};
pub use mining::mine_triplets;
pub use mlp::{forward, MlpConfig, MlpParams, PredictionBatch};
pub use optim::SgdMomentum;
pub use pool::test_time_pool;
pub use train::{derive_seed, train, write_loss_curve_csv, CurvePoint, LabeledSample};
