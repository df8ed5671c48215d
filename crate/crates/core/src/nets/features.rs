use crate::data::{Normalization, TargetKind, TrajectorySample};
use crate::dynamics::{motor_side_baseline, rnea, JointState, RobotModel};
use crate::Result;

/// Affine normalization coefficients `x ↦ a x + b` of every channel.
#[derive(Clone, Debug)]
pub struct Scales {
    pub a_q: Vec<f64>,
    pub b_q: Vec<f64>,
    pub a_v: Vec<f64>,
    pub b_v: Vec<f64>,
    pub a_a: Vec<f64>,
    pub b_a: Vec<f64>,
    pub a_y: Vec<f64>,
    pub b_y: Vec<f64>,
}

impl Scales {
    pub fn new(norm: &Normalization) -> Self {
        Scales {
            a_q: norm.q.scales(),
            b_q: norm.q.offsets(),
            a_v: norm.qd.scales(),
            b_v: norm.qd.offsets(),
            a_a: norm.qdd.scales(),
            b_a: norm.qdd.offsets(),
            a_y: norm.y.scales(),
            b_y: norm.y.offsets(),
        }
    }

    /// `a_y`, with constant channels treated as unit scale when dividing.
    pub fn a_y_safe(&self, i: usize) -> f64 {
        nonzero(self.a_y[i])
    }

    /// Output scale of scalar energy networks: `1 / mean_i(a_y,i · a_q,i)`.
    pub fn energy_scale(&self) -> f64 {
        let n = self.a_q.len();
        let m: f64 = (0..n).map(|i| self.a_y[i] * self.a_q[i]).sum::<f64>() / n as f64;
        1.0 / nonzero(m)
    }

    /// Column scaling `√(a_a / a_y)` of the inertia factor.
    pub fn inertia_scale(&self, i: usize) -> f64 {
        (nonzero(self.a_a[i]) / nonzero(self.a_y[i])).sqrt()
    }
}

fn nonzero(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        a
    }
}

/// Normalized model inputs of a sample set, laid out sample-major, with the
/// physical rates and the analytic baseline that the physics variants need.
#[derive(Clone, Debug)]
pub struct Features {
    pub dof: usize,
    pub len: usize,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
    pub qd_phys: Vec<f64>,
    pub qdd_phys: Vec<f64>,
    /// Frictionless rigid-body model of the target, physical units.
    pub baseline_phys: Option<Vec<f64>>,
    /// Normalized targets, when known.
    pub y: Option<Vec<f64>>,
}

impl Features {
    pub fn from_samples(
        samples: &[TrajectorySample],
        norm: &Normalization,
        robot: Option<&RobotModel>,
        target: TargetKind,
    ) -> Result<Self> {
        let states: Vec<JointState> = samples
            .iter()
            .map(|s| JointState::new(s.q.clone(), s.qd.clone(), s.qdd.clone()))
            .collect();
        let mut f = Self::from_states(&states, norm, robot, target)?;
        let mut y = Vec::with_capacity(samples.len() * f.dof);
        for s in samples {
            y.extend(norm.y.normalize(&s.y));
        }
        f.y = Some(y);
        Ok(f)
    }

    pub fn from_states(
        states: &[JointState],
        norm: &Normalization,
        robot: Option<&RobotModel>,
        target: TargetKind,
    ) -> Result<Self> {
        let n = norm.dof();
        let mut f = Features {
            dof: n,
            len: states.len(),
            q: Vec::with_capacity(states.len() * n),
            qd: Vec::with_capacity(states.len() * n),
            qdd: Vec::with_capacity(states.len() * n),
            qd_phys: Vec::with_capacity(states.len() * n),
            qdd_phys: Vec::with_capacity(states.len() * n),
            baseline_phys: robot.map(|_| Vec::with_capacity(states.len() * n)),
            y: None,
        };
        for s in states {
            s.validate(n)?;
            f.q.extend(norm.q.normalize(&s.q));
            f.qd.extend(norm.qd.normalize(&s.qd));
            f.qdd.extend(norm.qdd.normalize(&s.qdd));
            f.qd_phys.extend_from_slice(&s.qd);
            f.qdd_phys.extend_from_slice(&s.qdd);
            if let (Some(r), Some(b)) = (robot, f.baseline_phys.as_mut()) {
                b.extend(baseline(r, s, target)?);
            }
        }
        Ok(f)
    }

    pub fn row<'a>(&self, v: &'a [f64], k: usize) -> &'a [f64] {
        &v[k * self.dof..(k + 1) * self.dof]
    }
}

/// Frictionless rigid-body prediction of the given target kind.
pub fn baseline(robot: &RobotModel, state: &JointState, target: TargetKind) -> Result<Vec<f64>> {
    match target {
        TargetKind::JointTorque => rnea(robot, state),
        TargetKind::MotorTorque => motor_side_baseline(robot, state),
    }
}
