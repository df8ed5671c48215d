//! Losses, the Adam optimizer and the training loop.

mod adam;
mod config;
mod trainer;

pub use adam::{adam_step, AdamConfig, Moments};
pub use config::TrainConfig;
pub use trainer::{
    mse_loss, select_learning_rate, train, train_seeds, LrSelection, SampleAccess, TrainReport,
    TrainStatus,
};
