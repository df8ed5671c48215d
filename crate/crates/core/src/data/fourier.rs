use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::JointState;
use crate::{Error, Result};

/// Third-order Fourier coefficients of one joint (rad).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FourierJoint {
    pub a0: f64,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

/// Symmetric per-joint bounds on |q|, |q̇| and |q̈|.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JointLimits {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
}

/// Periodic excitation shared by all joints, executed `repetitions` times
/// back to back and sampled every `dt`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FourierTrajectory {
    pub period: f64,
    pub dt: f64,
    pub joints: Vec<FourierJoint>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub limits: Option<JointLimits>,
}

fn one() -> usize {
    1
}

/// Grid used to check joint limits over one period.
const LIMIT_GRID: usize = 4000;

impl FourierTrajectory {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Total sampled time, `repetitions · T`.
    pub fn duration(&self) -> f64 {
        self.period * self.repetitions as f64
    }

    /// `⌊duration/Δt⌋ + 1` samples at `t = kΔt`.
    pub fn sample_count(&self) -> usize {
        (self.duration() / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.sample_count())
            .map(|k| k as f64 * self.dt)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "period must be > 0, got {}",
                self.period
            )));
        }
        if !(self.dt > 0.0 && self.dt <= self.period / 20.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must satisfy 0 < dt <= T/20, got dt = {} for T = {}",
                self.dt, self.period
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
        }
        if self.joints.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no joints".into()));
        }
        if let Some(lim) = &self.limits {
            let n = self.dof();
            for (what, v) in [
                ("position limits", &lim.position),
                ("velocity limits", &lim.velocity),
                ("acceleration limits", &lim.acceleration),
            ] {
                if v.len() != n {
                    return Err(Error::dim(what, n, v.len()));
                }
            }
            let peaks = self.peaks();
            for i in 0..n {
                let checks = [
                    ("position", peaks[0][i], lim.position[i]),
                    ("velocity", peaks[1][i], lim.velocity[i]),
                    ("acceleration", peaks[2][i], lim.acceleration[i]),
                ];
                for (what, peak, limit) in checks {
                    if peak > limit {
                        return Err(Error::InvalidArgument(format!(
                            "joint {} {what} peak {peak:.4} exceeds limit {limit}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest |q|, |q̇|, |q̈| per joint over a dense grid of one period.
    pub fn peaks(&self) -> [Vec<f64>; 3] {
        let n = self.dof();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..=LIMIT_GRID {
            let s = self.eval_unchecked(self.period * k as f64 / LIMIT_GRID as f64);
            for i in 0..n {
                out[0][i] = f64::max(out[0][i], s.q[i].abs());
                out[1][i] = f64::max(out[1][i], s.qd[i].abs());
                out[2][i] = f64::max(out[2][i], s.qdd[i].abs());
            }
        }
        out
    }

    /// Position, velocity and acceleration at time `t ∈ [0, duration]`.
    pub fn eval(&self, t: f64) -> Result<JointState> {
        if !(0.0..=self.duration() * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside [0, {}]",
                self.duration()
            )));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> JointState {
        let w = self.omega();
        let n = self.dof();
        let mut s = JointState::at_rest(vec![0.0; n]);
        for (i, j) in self.joints.iter().enumerate() {
            let (mut q, mut qd, mut qdd) = (0.5 * j.a0, 0.0, 0.0);
            for k in 0..3 {
                let kw = (k + 1) as f64 * w;
                let (sn, cs) = (kw * t).sin_cos();
                q += j.a[k] * sn + j.b[k] * cs;
                qd += kw * (j.a[k] * cs - j.b[k] * sn);
                qdd -= kw * kw * (j.a[k] * sn + j.b[k] * cs);
            }
            s.q[i] = q;
            s.qd[i] = qd;
            s.qdd[i] = qdd;
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path, format!("cannot read trajectory config: {e}")))?;
        let t: FourierTrajectory =
            serde_json::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        t.validate()
            .map_err(|e| Error::config(path, e.to_string()))?;
        Ok(t)
    }

    /// Default excitation for [`RobotModel::surrogate`](crate::dynamics::RobotModel::surrogate).
    pub fn surrogate_default() -> Self {
        let joint = |a0: f64, a: [f64; 3], b: [f64; 3]| FourierJoint { a0, a, b };
        FourierTrajectory {
            period: 5.0,
            dt: 0.008,
            repetitions: 2,
            joints: vec![
                joint(0.0, [0.9, 0.35, 0.12], [0.2, -0.25, 0.08]),
                joint(0.4, [0.55, -0.3, 0.1], [-0.35, 0.15, 0.1]),
                joint(-0.6, [0.7, 0.25, -0.12], [0.3, 0.2, -0.1]),
            ],
            limits: Some(JointLimits {
                position: vec![2.5, 2.0, 2.5],
                velocity: vec![3.0, 3.0, 3.0],
                acceleration: vec![10.0, 10.0, 10.0],
            }),
        }
    }
}
