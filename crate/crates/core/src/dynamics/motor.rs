use super::rnea::{kinetic_energy, potential_energy, rnea};
use super::robot::{FrictionCoefficients, JointState, RobotModel};
use crate::{Error, Result};

/// Motor-side torques: `τ_RBD/ψ + I_M ψ q̈ + τ_D` per joint.
pub fn motor_torque(
    model: &RobotModel,
    state: &JointState,
    friction: &FrictionCoefficients,
) -> Result<Vec<f64>> {
    friction.validate(model.dof())?;
    let mut tau = motor_side_baseline(model, state)?;
    for (t, d) in tau.iter_mut().zip(friction.torque(&state.qd)) {
        *t += d;
    }
    Ok(tau)
}

/// Frictionless motor-side model `τ_RBD/ψ + I_M ψ q̈`.
pub fn motor_side_baseline(model: &RobotModel, state: &JointState) -> Result<Vec<f64>> {
    let tau = rnea(model, state)?;
    Ok(reflect_to_motor(model, &tau, &state.qdd))
}

/// `τ/ψ + I_M ψ q̈` for an already computed joint torque.
pub fn reflect_to_motor(model: &RobotModel, tau: &[f64], qdd: &[f64]) -> Vec<f64> {
    model
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let m = &l.motor;
            tau[i] / m.gear_ratio + m.motor_inertia * m.gear_ratio * qdd[i]
        })
        .collect()
}

/// `τ_u = ψ K I`.
pub fn current_to_torque(model: &RobotModel, currents: &[f64]) -> Result<Vec<f64>> {
    if currents.len() != model.dof() {
        return Err(Error::dim("currents", model.dof(), currents.len()));
    }
    Ok(model
        .links
        .iter()
        .zip(currents)
        .map(|(l, &i)| l.motor.gear_ratio * l.motor.torque_constant * i)
        .collect())
}

/// `I = τ_u / (ψ K)`.
pub fn torque_to_current(model: &RobotModel, torques: &[f64]) -> Result<Vec<f64>> {
    if torques.len() != model.dof() {
        return Err(Error::dim("torques", model.dof(), torques.len()));
    }
    Ok(model
        .links
        .iter()
        .zip(torques)
        .map(|(l, &t)| t / (l.motor.gear_ratio * l.motor.torque_constant))
        .collect())
}

/// `q̇ᵀτ − d(T+V)/dt` at every interior sample, with the time derivative
/// by central differences of the total energy.
pub fn power_balance_residual(
    model: &RobotModel,
    trajectory: &[JointState],
    dt: f64,
) -> Result<Vec<f64>> {
    if trajectory.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power balance needs at least 3 samples, got {}",
            trajectory.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let energy = trajectory
        .iter()
        .map(|s| Ok(kinetic_energy(model, &s.q, &s.qd)? + potential_energy(model, &s.q)?))
        .collect::<Result<Vec<f64>>>()?;
    (1..trajectory.len() - 1)
        .map(|k| {
            let s = &trajectory[k];
            let tau = rnea(model, s)?;
            let power: f64 = s.qd.iter().zip(&tau).map(|(v, t)| v * t).sum();
            Ok(power - (energy[k + 1] - energy[k - 1]) / (2.0 * dt))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn pendulum_viscous_hand_value() {
        let p = RobotModel::pendulum(1.0, 1.0).unwrap();
        let f = FrictionCoefficients::viscous(vec![0.5]);
        let t = motor_torque(
            &p,
            &JointState::new(vec![FRAC_PI_2], vec![1.0], vec![0.0]),
            &f,
        )
        .unwrap();
        assert!((t[0] - 9.31).abs() < 1e-12);
    }

    #[test]
    fn direct_drive_without_friction_is_rnea() {
        let r = RobotModel::surrogate().direct_drive();
        let s = JointState::new(
            vec![0.1, 0.2, 0.3],
            vec![-1.0, 0.5, 2.0],
            vec![3.0, -2.0, 1.0],
        );
        let a = motor_torque(&r, &s, &FrictionCoefficients::zero(3)).unwrap();
        assert_eq!(a, rnea(&r, &s).unwrap());
    }

    #[test]
    fn static_coulomb_only() {
        let r = RobotModel::surrogate();
        let f = FrictionCoefficients {
            viscous: vec![0.0; 3],
            coulomb: vec![3.0, 2.0, 1.0],
            coulomb_smoothing_velocity: 0.01,
        };
        let s = JointState::at_rest(vec![0.4, -0.2, 0.9]);
        let t = motor_torque(&r, &s, &f).unwrap();
        let base = rnea(&r, &s).unwrap();
        for i in 0..3 {
            assert_eq!(t[i], base[i] / r.links[i].motor.gear_ratio);
        }
    }

    #[test]
    fn current_conversion() {
        let mut r = RobotModel::pendulum(1.0, 1.0).unwrap();
        r.links[0].motor.gear_ratio = 100.0;
        r.links[0].motor.torque_constant = 0.1;
        assert!((current_to_torque(&r, &[0.5]).unwrap()[0] - 5.0).abs() < 1e-15);
        assert_eq!(current_to_torque(&r, &[0.0]).unwrap()[0], 0.0);
        let x = torque_to_current(&r, &current_to_torque(&r, &[0.37]).unwrap()).unwrap()[0];
        assert!((x - 0.37).abs() < 1e-12);
    }

    #[test]
    fn static_trajectory_has_zero_residual() {
        let p = RobotModel::pendulum(1.0, 1.0).unwrap();
        let traj = vec![JointState::at_rest(vec![0.4]); 5];
        assert!(power_balance_residual(&p, &traj, 1e-3)
            .unwrap()
            .iter()
            .all(|r| *r == 0.0));
        assert!(power_balance_residual(&p, &traj[..2], 1e-3).is_err());
    }
}
