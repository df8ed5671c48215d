use crate::data::TargetKind;
use crate::dynamics::{motor_torque, rnea, JointState, RobotModel};
use crate::Result;

use super::features::baseline;
use super::model::IdModel;

/// Anything that maps a joint state to a physical torque prediction.
pub trait Predictor {
    fn label(&self) -> String;

    fn predict(&self, state: &JointState) -> Result<Vec<f64>>;

    fn predict_many(&self, states: &[JointState]) -> Result<Vec<Vec<f64>>> {
        states.iter().map(|s| self.predict(s)).collect()
    }
}

impl Predictor for IdModel {
    fn label(&self) -> String {
        self.variant.label().to_string()
    }

    fn predict(&self, state: &JointState) -> Result<Vec<f64>> {
        IdModel::predict(self, state)
    }

    fn predict_many(&self, states: &[JointState]) -> Result<Vec<Vec<f64>>> {
        let f = self.features(states)?;
        let yn = self.predict_features(&f)?;
        Ok(yn
            .chunks(self.dof)
            .map(|r| self.normalization.y.denormalize(r))
            .collect())
    }
}

/// The data-generating model itself, ground-truth friction included.
pub struct GroundTruth<'a> {
    pub robot: &'a RobotModel,
    pub target: TargetKind,
}

impl Predictor for GroundTruth<'_> {
    fn label(&self) -> String {
        "generator".into()
    }

    fn predict(&self, state: &JointState) -> Result<Vec<f64>> {
        match self.target {
            TargetKind::JointTorque => rnea(self.robot, state),
            TargetKind::MotorTorque => {
                motor_torque(self.robot, state, &self.robot.ground_truth_friction)
            }
        }
    }
}

/// Rigid-body model without any friction term.
pub struct RigidBodyBaseline<'a> {
    pub robot: &'a RobotModel,
    pub target: TargetKind,
}

impl Predictor for RigidBodyBaseline<'_> {
    fn label(&self) -> String {
        "frictionless".into()
    }

    fn predict(&self, state: &JointState) -> Result<Vec<f64>> {
        baseline(self.robot, state, self.target)
    }
}
