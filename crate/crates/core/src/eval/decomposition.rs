use serde::{Deserialize, Serialize};

use crate::data::TrajectorySample;
use crate::dynamics::{motor_side_baseline, rnea, JointState, RobotModel};
use crate::nets::Predictor;
use crate::{Error, Result};

use super::metrics::states_of;

/// Additive split of one sample's motor-side torque.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ContributionRow {
    pub t: f64,
    /// Rigid-body torque of the point-mass robot, over ψ.
    pub mass: Vec<f64>,
    /// Remaining rigid-body torque from the rotational inertias, over ψ.
    pub inertia: Vec<f64>,
    /// `I_M ψ q̈`.
    pub motor_inertia: Vec<f64>,
    /// `y − τ_RBD/ψ − I_M ψ q̈`.
    pub friction: Vec<f64>,
    pub total: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub rows: Vec<ContributionRow>,
}

impl Decomposition {
    /// Largest `|mass + inertia + motor_inertia + friction − total|`.
    pub fn telescoping_error(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| {
                (0..r.total.len()).map(move |i| {
                    (r.mass[i] + r.inertia[i] + r.motor_inertia[i] + r.friction[i] - r.total[i])
                        .abs()
                })
            })
            .fold(0.0, f64::max)
    }
}

pub fn decompose_contributions(
    robot: &RobotModel,
    samples: &[TrajectorySample],
) -> Result<Decomposition> {
    let point = robot.point_mass_equivalent();
    let n = robot.dof();
    let psi = robot.gear_ratios();
    let rows = samples
        .iter()
        .map(|s| {
            if s.y.len() != n {
                return Err(Error::dim("target", n, s.y.len()));
            }
            let st = JointState::new(s.q.clone(), s.qd.clone(), s.qdd.clone());
            let full = rnea(robot, &st)?;
            let pm = rnea(&point, &st)?;
            let mut row = ContributionRow {
                t: s.t,
                mass: vec![0.0; n],
                inertia: vec![0.0; n],
                motor_inertia: vec![0.0; n],
                friction: vec![0.0; n],
                total: s.y.clone(),
            };
            for i in 0..n {
                let rbd = full[i] / psi[i];
                row.mass[i] = pm[i] / psi[i];
                row.inertia[i] = rbd - row.mass[i];
                row.motor_inertia[i] = robot.links[i].motor.motor_inertia * psi[i] * s.qdd[i];
                row.friction[i] = s.y[i] - rbd - row.motor_inertia[i];
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Decomposition { rows })
}

/// Motor-torque prediction minus the frictionless motor-side model.
pub fn dissipative_estimate(
    model: &dyn Predictor,
    robot: &RobotModel,
    states: &[JointState],
) -> Result<Vec<Vec<f64>>> {
    let preds = model.predict_many(states)?;
    states
        .iter()
        .zip(preds)
        .map(|(s, p)| {
            let base = motor_side_baseline(robot, s)?;
            Ok(p.iter().zip(&base).map(|(p, b)| p - b).collect())
        })
        .collect()
}

/// The generator's dissipative torque at each sample.
pub fn true_dissipative(robot: &RobotModel, samples: &[TrajectorySample]) -> Vec<Vec<f64>> {
    samples
        .iter()
        .map(|s| robot.ground_truth_friction.torque(&s.qd))
        .collect()
}

pub fn dissipative_for_samples(
    model: &dyn Predictor,
    robot: &RobotModel,
    samples: &[TrajectorySample],
) -> Result<Vec<Vec<f64>>> {
    dissipative_estimate(model, robot, &states_of(samples))
}
