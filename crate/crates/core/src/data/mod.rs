//! Excitation trajectories, synthetic measurements and pre-processing.

mod csv_io;
mod dataset;
mod filter;
mod fourier;
mod synth;

pub use csv_io::{csv_header, load_csv, save_csv, sidecar_path, DatasetMeta};
pub use dataset::{
    normalize_split, train_size, ChannelStats, Dataset, Normalization, TargetKind,
    TrajectorySample, MIN_SAMPLES,
};
pub use filter::{differentiate, lowpass_zero_phase};
pub use fourier::{FourierJoint, FourierTrajectory, JointLimits};
pub use synth::{preprocess, synthesize_dataset, NoiseConfig, PerJoint, PreprocessConfig};
