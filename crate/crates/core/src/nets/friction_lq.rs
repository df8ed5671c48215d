use crate::data::{TargetKind, TrajectorySample};
use crate::dynamics::{FrictionCoefficients, JointState, RobotModel};
use crate::{Error, Result};

use super::features::baseline;

/// Viscous coefficients identified by least squares, plus the joints whose
/// velocity regressor was identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LqFit {
    pub friction: FrictionCoefficients,
    pub degenerate_joints: Vec<usize>,
}

/// Per joint, `θ = argmin Σₖ (yₖ − baselineₖ + θ q̇ₖ)²`, i.e.
/// `θ = −Σ rₖ q̇ₖ / Σ q̇ₖ²` with `r = y − baseline`.
pub fn rnea_lq_fit(
    robot: &RobotModel,
    train: &[TrajectorySample],
    target: TargetKind,
) -> Result<LqFit> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training slice".into()));
    }
    let n = robot.dof();
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for s in train {
        let st = JointState::new(s.q.clone(), s.qd.clone(), s.qdd.clone());
        let b = baseline(robot, &st, target)?;
        for i in 0..n {
            let r = s.y[i] - b[i];
            num[i] += r * s.qd[i];
            den[i] += s.qd[i] * s.qd[i];
        }
    }
    let mut degenerate = Vec::new();
    let viscous = (0..n)
        .map(|i| {
            if den[i] == 0.0 {
                log::warn!(
                    "joint {}: all velocities are zero, viscous coefficient set to 0",
                    i + 1
                );
                degenerate.push(i);
                0.0
            } else {
                -num[i] / den[i]
            }
        })
        .collect();
    Ok(LqFit {
        friction: FrictionCoefficients {
            viscous,
            coulomb: vec![0.0; n],
            coulomb_smoothing_velocity: robot.ground_truth_friction.coulomb_smoothing_velocity,
        },
        degenerate_joints: degenerate,
    })
}
