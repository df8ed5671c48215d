//! Rigid-body dynamics of serial revolute chains and the motor-side model.

mod motor;
mod rnea;
mod robot;

pub use motor::{
    current_to_torque, motor_side_baseline, motor_torque, power_balance_residual, reflect_to_motor,
    torque_to_current,
};
pub use rnea::{
    euler_lagrange_oracle, forward_kinematics, gravity_torque, kinetic_energy, mass_matrix,
    potential_energy, rnea, ORACLE_STEP,
};
pub use robot::{
    FrictionCoefficients, JointSpec, JointState, JointType, Link, MotorSpec, RobotModel,
    SpatialInertia, DEFAULT_COULOMB_SMOOTHING,
};
