//! Recursive Newton-Euler in body-frame spatial coordinates.
//!
//! Spatial motion vectors are `(ω, v)` with `v` the velocity of the body
//! point at the frame origin; spatial forces are `(n, f)` with the moment
//! taken about that origin. Gravity is applied as a base acceleration of
//! `−g`, so the result already contains the gravity load.

use nalgebra::{DMatrix, Matrix3, Rotation3, Unit, Vector3};

use super::robot::{mat3, JointState, RobotModel};
use crate::{Error, Result};

type V3 = Vector3<f64>;

#[derive(Clone, Copy)]
struct Motion {
    ang: V3,
    lin: V3,
}

#[derive(Clone, Copy)]
struct Force {
    ang: V3,
    lin: V3,
}

impl Motion {
    const ZERO: Motion = Motion {
        ang: V3::new(0.0, 0.0, 0.0),
        lin: V3::new(0.0, 0.0, 0.0),
    };

    fn add(self, o: Motion) -> Motion {
        Motion {
            ang: self.ang + o.ang,
            lin: self.lin + o.lin,
        }
    }

    fn scale(self, s: f64) -> Motion {
        Motion {
            ang: self.ang * s,
            lin: self.lin * s,
        }
    }

    /// `self ×ₘ m`
    fn cross_motion(self, m: Motion) -> Motion {
        Motion {
            ang: self.ang.cross(&m.ang),
            lin: self.ang.cross(&m.lin) + self.lin.cross(&m.ang),
        }
    }

    /// `self ×_f f`
    fn cross_force(self, f: Force) -> Force {
        Force {
            ang: self.ang.cross(&f.ang) + self.lin.cross(&f.lin),
            lin: self.ang.cross(&f.lin),
        }
    }
}

/// Parent-to-child coordinate transform: child axes `E` (rows) and child
/// origin `r` in parent coordinates.
#[derive(Clone, Copy)]
struct Xform {
    e: Matrix3<f64>,
    r: V3,
}

impl Xform {
    fn motion(&self, m: Motion) -> Motion {
        Motion {
            ang: self.e * m.ang,
            lin: self.e * (m.lin - self.r.cross(&m.ang)),
        }
    }

    /// Transpose action on forces: child coordinates back to parent.
    fn force_to_parent(&self, f: Force) -> Force {
        let fl = self.e.transpose() * f.lin;
        Force {
            ang: self.e.transpose() * f.ang + self.r.cross(&fl),
            lin: fl,
        }
    }
}

struct Body {
    mass: f64,
    com: V3,
    inertia: Matrix3<f64>,
    axis: V3,
}

impl Body {
    fn apply(&self, m: Motion) -> Force {
        Force {
            ang: self.inertia * m.ang + self.com.cross(&m.lin) * self.mass,
            lin: (m.lin + m.ang.cross(&self.com)) * self.mass,
        }
    }
}

/// Orientation of body `i` in its parent frame and the joint axis in body
/// coordinates.
fn joint_frame(model: &RobotModel, i: usize, q: f64) -> (Matrix3<f64>, V3, V3) {
    let j = &model.links[i].joint;
    let axis = V3::from(j.axis);
    let r0 = mat3(&j.rotation);
    let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(axis), q).into_inner() * r0;
    (rot, V3::from(j.translation), r0.transpose() * axis)
}

fn bodies(model: &RobotModel) -> Vec<Body> {
    model
        .links
        .iter()
        .map(|l| Body {
            mass: l.inertia.mass,
            com: l.inertia.com(),
            inertia: l.inertia.inertia_at_origin(),
            axis: V3::zeros(),
        })
        .collect()
}

fn check(model: &RobotModel, state: &JointState) -> Result<()> {
    state.validate(model.dof())
}

fn check_q(model: &RobotModel, q: &[f64]) -> Result<()> {
    if q.len() != model.dof() {
        return Err(Error::dim("q", model.dof(), q.len()));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entry in q".into()));
    }
    Ok(())
}

fn rnea_core(model: &RobotModel, q: &[f64], qd: &[f64], qdd: &[f64], gravity: bool) -> Vec<f64> {
    let n = model.dof();
    let mut bodies = bodies(model);
    let mut xs = Vec::with_capacity(n);
    let mut forces = Vec::with_capacity(n);
    let g = V3::from(model.gravity);
    let mut v_prev = Motion::ZERO;
    let mut a_prev = Motion {
        ang: V3::zeros(),
        lin: if gravity { -g } else { V3::zeros() },
    };
    for i in 0..n {
        let (rot, p, s) = joint_frame(model, i, q[i]);
        bodies[i].axis = s;
        let x = Xform {
            e: rot.transpose(),
            r: p,
        };
        let s_m = Motion {
            ang: s,
            lin: V3::zeros(),
        };
        let vj = s_m.scale(qd[i]);
        let v = x.motion(v_prev).add(vj);
        let a = x
            .motion(a_prev)
            .add(s_m.scale(qdd[i]))
            .add(v.cross_motion(vj));
        let b = &bodies[i];
        let ia = b.apply(a);
        let iv = b.apply(v);
        let gyro = v.cross_force(iv);
        forces.push(Force {
            ang: ia.ang + gyro.ang,
            lin: ia.lin + gyro.lin,
        });
        xs.push(x);
        v_prev = v;
        a_prev = a;
    }
    let mut tau = vec![0.0; n];
    for i in (0..n).rev() {
        let f = forces[i];
        tau[i] = bodies[i].axis.dot(&f.ang);
        if i > 0 {
            let fp = xs[i].force_to_parent(f);
            forces[i - 1].ang += fp.ang;
            forces[i - 1].lin += fp.lin;
        }
    }
    tau
}

/// Joint torques `τ = M(q) q̈ − C(q, q̇) − G(q)` with `G = −∇V`.
pub fn rnea(model: &RobotModel, state: &JointState) -> Result<Vec<f64>> {
    check(model, state)?;
    Ok(rnea_core(model, &state.q, &state.qd, &state.qdd, true))
}

/// Gravity load `−G(q) = ∇V(q)`.
pub fn gravity_torque(model: &RobotModel, q: &[f64]) -> Result<Vec<f64>> {
    check_q(model, q)?;
    let z = vec![0.0; q.len()];
    Ok(rnea_core(model, q, &z, &z, true))
}

/// Joint-space inertia matrix by unit accelerations.
pub fn mass_matrix(model: &RobotModel, q: &[f64]) -> Result<DMatrix<f64>> {
    check_q(model, q)?;
    let n = q.len();
    let zero = vec![0.0; n];
    let bias = rnea_core(model, q, &zero, &zero, true);
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = rnea_core(model, q, &zero, &e, true);
        for i in 0..n {
            m[(i, j)] = col[i] - bias[i];
        }
        e[j] = 0.0;
    }
    Ok(m)
}

/// World-frame pose `(R, p)` of every body frame.
pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<Vec<(Matrix3<f64>, V3)>> {
    check_q(model, q)?;
    let mut poses = Vec::with_capacity(q.len());
    let mut r_w = Matrix3::identity();
    let mut p_w = V3::zeros();
    for (i, &qi) in q.iter().enumerate() {
        let (rot, p, _) = joint_frame(model, i, qi);
        p_w += r_w * p;
        r_w *= rot;
        poses.push((r_w, p_w));
    }
    Ok(poses)
}

/// `V = −Σᵢ mᵢ gᵀ pᵢ(q)` with `pᵢ` the world center of mass of body `i`.
pub fn potential_energy(model: &RobotModel, q: &[f64]) -> Result<f64> {
    let g = V3::from(model.gravity);
    let poses = forward_kinematics(model, q)?;
    Ok(poses
        .iter()
        .zip(&model.links)
        .map(|((r, p), l)| -l.inertia.mass * g.dot(&(p + r * l.inertia.com())))
        .sum())
}

/// `T = ½ q̇ᵀ M(q) q̇`.
pub fn kinetic_energy(model: &RobotModel, q: &[f64], qd: &[f64]) -> Result<f64> {
    if qd.len() != model.dof() {
        return Err(Error::dim("qd", model.dof(), qd.len()));
    }
    let m = mass_matrix(model, q)?;
    let v = nalgebra::DVector::from_column_slice(qd);
    Ok(0.5 * v.dot(&(&m * &v)))
}

/// Finite-difference step used by [`euler_lagrange_oracle`].
pub const ORACLE_STEP: f64 = 1e-6;

/// Euler-Lagrange torques assembled from [`mass_matrix`] and
/// [`potential_energy`] alone, with every `∇_q` taken by central
/// differences. Independent of the recursion in [`rnea`].
pub fn euler_lagrange_oracle(model: &RobotModel, state: &JointState) -> Result<Vec<f64>> {
    check(model, state)?;
    let n = model.dof();
    let h = ORACLE_STEP;
    let qd = nalgebra::DVector::from_column_slice(&state.qd);
    let qdd = nalgebra::DVector::from_column_slice(&state.qdd);
    let m = mass_matrix(model, &state.q)?;
    let mut tau = &m * &qdd;
    let mut dm = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    let mut q = state.q.clone();
    for k in 0..n {
        let q0 = q[k];
        q[k] = q0 + h;
        let (mp, vp) = (mass_matrix(model, &q)?, potential_energy(model, &q)?);
        q[k] = q0 - h;
        let (mm, vm) = (mass_matrix(model, &q)?, potential_energy(model, &q)?);
        q[k] = q0;
        dm.push((mp - mm) / (2.0 * h));
        dv.push((vp - vm) / (2.0 * h));
    }
    // ∇_q(q̇ᵀM)q̇ = Σ_k (∂M/∂q_k) q̇_k q̇
    for (k, dmk) in dm.iter().enumerate() {
        tau += dmk * &qd * qd[k];
    }
    for i in 0..n {
        tau[i] += -0.5 * qd.dot(&(&dm[i] * &qd)) + dv[i];
    }
    Ok(tau.iter().copied().collect())
}
