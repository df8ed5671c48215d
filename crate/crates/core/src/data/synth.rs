use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, TargetKind, TrajectorySample};
use super::filter::{differentiate, lowpass_zero_phase};
use super::fourier::FourierTrajectory;
use crate::dynamics::{current_to_torque, motor_torque, rnea, torque_to_current, RobotModel};
use crate::{Error, Result};

/// One value for every joint, or one per joint.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum PerJoint {
    All(f64),
    Each(Vec<f64>),
}

impl PerJoint {
    pub fn resolve(&self, n: usize, what: &'static str) -> Result<Vec<f64>> {
        match self {
            PerJoint::All(v) => Ok(vec![*v; n]),
            PerJoint::Each(v) if v.len() == n => Ok(v.clone()),
            PerJoint::Each(v) => Err(Error::dim(what, n, v.len())),
        }
    }
}

/// Gaussian measurement noise on motor currents and joint velocities.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Current noise std as a fraction of the largest |current| on that joint.
    pub current_rel_std: PerJoint,
    /// Velocity noise std, rad/s.
    pub velocity_std: PerJoint,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            current_rel_std: PerJoint::All(0.01),
            velocity_std: PerJoint::All(1e-3),
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        NoiseConfig {
            current_rel_std: PerJoint::All(0.0),
            velocity_std: PerJoint::All(0.0),
        }
    }
}

/// Samples the excitation, measures torque through the motor-current path
/// and estimates accelerations from the noisy velocities.
///
/// Each sample draws its noise from its own ChaCha stream keyed by
/// `(seed, sample index)`, so the result does not depend on evaluation order.
pub fn synthesize_dataset(
    model: &RobotModel,
    traj: &FourierTrajectory,
    noise: &NoiseConfig,
    seed: u64,
    target: TargetKind,
) -> Result<Dataset> {
    traj.validate()?;
    let n = model.dof();
    if traj.dof() != n {
        return Err(Error::dim("trajectory joints", n, traj.dof()));
    }
    let rel = noise.current_rel_std.resolve(n, "current noise")?;
    let vel_std = noise.velocity_std.resolve(n, "velocity noise")?;
    if rel
        .iter()
        .chain(&vel_std)
        .any(|s| !(*s >= 0.0 && s.is_finite()))
    {
        return Err(Error::InvalidArgument("noise std must be >= 0".into()));
    }
    let times = traj.times();
    let mut states = Vec::with_capacity(times.len());
    let mut currents = Vec::with_capacity(times.len());
    for &t in &times {
        let s = traj.eval(t)?;
        let torque = match target {
            TargetKind::JointTorque => rnea(model, &s)?,
            TargetKind::MotorTorque => motor_torque(model, &s, &model.ground_truth_friction)?,
        };
        currents.push(torque_to_current(model, &torque)?);
        states.push(s);
    }
    let mut current_std = vec![0.0; n];
    for i in 0..n {
        let peak = currents.iter().map(|c| c[i].abs()).fold(0.0, f64::max);
        current_std[i] = rel[i] * peak;
    }
    let mut samples = Vec::with_capacity(times.len());
    for (k, (mut s, mut cur)) in states.into_iter().zip(currents).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            cur[i] += current_std[i] * z;
        }
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            s.qd[i] += vel_std[i] * z;
        }
        samples.push(TrajectorySample {
            t: times[k],
            y: current_to_torque(model, &cur)?,
            q: s.q,
            qd: s.qd,
            qdd: s.qdd,
        });
    }
    let mut ds = Dataset::new(samples, target, traj.dt);
    replace_accelerations(&mut ds, |v| Ok(v.to_vec()))?;
    Ok(ds)
}

/// Non-causal filtering applied before normalization.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    /// Cutoff for the torque observations, Hz; `null` leaves them raw.
    pub torque_cutoff_hz: Option<PerJoint>,
    /// Cutoff applied to velocities before differentiating, Hz.
    pub velocity_cutoff_hz: Option<PerJoint>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            torque_cutoff_hz: Some(PerJoint::All(4.0)),
            velocity_cutoff_hz: Some(PerJoint::All(4.0)),
        }
    }
}

impl PreprocessConfig {
    pub fn none() -> Self {
        PreprocessConfig {
            torque_cutoff_hz: None,
            velocity_cutoff_hz: None,
        }
    }
}

/// Low-passes the torque channels and re-estimates accelerations from
/// low-passed velocities. Velocities themselves stay as measured.
pub fn preprocess(raw: &Dataset, cfg: &PreprocessConfig) -> Result<Dataset> {
    raw.validate()?;
    let n = raw.dof();
    let mut ds = raw.clone();
    if let Some(fc) = &cfg.torque_cutoff_hz {
        let fc = fc.resolve(n, "torque cutoffs")?;
        for (i, &f) in fc.iter().enumerate() {
            let col: Vec<f64> = ds.samples.iter().map(|s| s.y[i]).collect();
            for (s, v) in ds
                .samples
                .iter_mut()
                .zip(lowpass_zero_phase(&col, f, ds.dt)?)
            {
                s.y[i] = v;
            }
        }
    }
    let fc = match &cfg.velocity_cutoff_hz {
        Some(fc) => Some(fc.resolve(n, "velocity cutoffs")?),
        None => None,
    };
    let dt = ds.dt;
    let mut joint = 0;
    replace_accelerations(&mut ds, |v| {
        let out = match &fc {
            Some(fc) => lowpass_zero_phase(v, fc[joint], dt),
            None => Ok(v.to_vec()),
        };
        joint += 1;
        out
    })?;
    Ok(ds)
}

fn replace_accelerations(
    ds: &mut Dataset,
    mut smooth: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<()> {
    for i in 0..ds.dof() {
        let v: Vec<f64> = ds.samples.iter().map(|s| s.qd[i]).collect();
        let a = differentiate(&smooth(&v)?, ds.dt)?;
        for (s, x) in ds.samples.iter_mut().zip(a) {
            s.qdd[i] = x;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> FourierTrajectory {
        let mut t = FourierTrajectory::surrogate_default();
        t.period = 2.0;
        t.limits = None;
        t
    }

    #[test]
    fn noiseless_motor_target_is_motor_torque() {
        let r = RobotModel::surrogate();
        let traj = short();
        let d = synthesize_dataset(&r, &traj, &NoiseConfig::none(), 1, TargetKind::MotorTorque)
            .unwrap();
        for s in &d.samples {
            let st = traj.eval(s.t).unwrap();
            let want = motor_torque(&r, &st, &r.ground_truth_friction).unwrap();
            for i in 0..3 {
                assert!((s.y[i] - want[i]).abs() <= 1e-15 * want[i].abs().max(1.0));
            }
            assert_eq!(s.qd, st.qd);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let r = RobotModel::surrogate();
        let a = synthesize_dataset(
            &r,
            &short(),
            &NoiseConfig::default(),
            9,
            TargetKind::MotorTorque,
        )
        .unwrap();
        let b = synthesize_dataset(
            &r,
            &short(),
            &NoiseConfig::default(),
            9,
            TargetKind::MotorTorque,
        )
        .unwrap();
        let c = synthesize_dataset(
            &r,
            &short(),
            &NoiseConfig::default(),
            10,
            TargetKind::MotorTorque,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mismatched_joint_count_is_rejected() {
        let r = RobotModel::pendulum(1.0, 1.0).unwrap();
        assert!(synthesize_dataset(
            &r,
            &short(),
            &NoiseConfig::none(),
            0,
            TargetKind::JointTorque
        )
        .is_err());
    }

    #[test]
    fn per_joint_values_resolve() {
        assert_eq!(PerJoint::All(2.0).resolve(3, "x").unwrap(), vec![2.0; 3]);
        assert!(PerJoint::Each(vec![1.0]).resolve(3, "x").is_err());
    }
}
