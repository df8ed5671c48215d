//! Network components and the inverse-dynamics model zoo.

mod features;
mod friction_lq;
mod init;
mod lagrangian;
mod mlp;
mod model;
mod predictor;

pub use features::{baseline, Features, Scales};
pub use friction_lq::{rnea_lq_fit, LqFit};
pub use init::{init_params, InitScheme, OUTPUT_LAYER_SCALE};
pub use lagrangian::{delan_torque_at, lnn_torque_at, InertiaFn};
pub use mlp::{mlp_eval, mlp_forward, Activation, LayerShape, MlpOutput, MlpSpec, NetworkParams};
pub use model::{
    tri_len, tri_row, DelanInertia, GravityHead, IdModel, LnnLagrangian, ModelConfig, Pass, Variant,
};
pub use predictor::{GroundTruth, Predictor, RigidBodyBaseline};
