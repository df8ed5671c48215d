#![allow(dead_code)]

use idnets::autodiff::{grad, hessian, mixed_jacobian, param_gradient, ParamFn, Real, ScalarFn};
use idnets::data::{
    normalize_split, synthesize_dataset, Dataset, FourierTrajectory, NoiseConfig, TargetKind,
};
use idnets::dynamics::{
    FrictionCoefficients, JointSpec, JointState, Link, MotorSpec, RobotModel, SpatialInertia,
};
use idnets::nets::{init_params, mlp_eval, InertiaFn, InitScheme, MlpSpec, NetworkParams};
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: Vector3<f64> = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let len = v.norm();
        if len > 0.2 && len < 1.0 {
            let u = v / len;
            return [u.x, u.y, u.z];
        }
    }
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Random serial chain with physically consistent inertias.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> RobotModel {
    let links = (0..n)
        .map(|_| {
            let mass = rng.random_range(0.5..5.0);
            // principal moments from a box: the triangle inequality holds
            let d: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..0.4));
            let k = mass / 12.0;
            let p = [
                k * (d[1] * d[1] + d[2] * d[2]),
                k * (d[0] * d[0] + d[2] * d[2]),
                k * (d[0] * d[0] + d[1] * d[1]),
            ];
            let r = Rotation3::from_axis_angle(
                &Unit::new_normalize(Vector3::from(unit(rng))),
                rng.random_range(0.0..6.0),
            )
            .into_inner();
            let i_c = r * Matrix3::from_diagonal(&Vector3::from(p)) * r.transpose();
            let com: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
            let frame = Rotation3::from_axis_angle(
                &Unit::new_normalize(Vector3::from(unit(rng))),
                rng.random_range(0.0..6.0),
            )
            .into_inner();
            Link {
                joint: JointSpec {
                    axis: unit(rng),
                    rotation: rows(&frame),
                    translation: std::array::from_fn(|_| rng.random_range(-0.5..0.5)),
                    joint_type: Default::default(),
                },
                inertia: SpatialInertia::from_com_inertia(mass, com, rows(&i_c)),
                motor: MotorSpec::direct(),
            }
        })
        .collect();
    RobotModel::new(links, [0.0, 0.0, -9.81], FrictionCoefficients::zero(n)).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> JointState {
    let pi = std::f64::consts::PI;
    JointState::new(
        (0..n).map(|_| rng.random_range(-pi..pi)).collect(),
        (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        (0..n).map(|_| rng.random_range(-10.0..10.0)).collect(),
    )
}

/// Short noiseless surrogate dataset, normalized and split.
pub fn small_dataset(target: TargetKind, period: f64) -> (RobotModel, Dataset) {
    let robot = RobotModel::surrogate();
    let mut traj = FourierTrajectory::surrogate_default();
    traj.period = period;
    traj.limits = None;
    let raw = synthesize_dataset(&robot, &traj, &NoiseConfig::none(), 3, target).unwrap();
    (robot, normalize_split(&raw).unwrap())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

fn sqrt<T: Real>(x: T) -> T {
    (x.ln() * 0.5).exp()
}

/// Two point masses on a planar chain about y, `q = 0` hanging down.
#[derive(Clone, Copy)]
pub struct Arm {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
}

pub const G: f64 = 9.81;

impl Arm {
    pub fn robot(&self) -> RobotModel {
        RobotModel::planar_arm(&[self.m1, self.m2], &[self.l1, self.l2]).unwrap()
    }

    pub fn mass<T: Real>(&self, q: &[T]) -> [[T; 2]; 2] {
        let c2 = q[1].cos();
        let m12 = c2 * (self.m2 * self.l1 * self.l2) + self.m2 * self.l2 * self.l2;
        let m11 = c2 * (2.0 * self.m2 * self.l1 * self.l2)
            + (self.m1 * self.l1 * self.l1 + self.m2 * (self.l1 * self.l1 + self.l2 * self.l2));
        [[m11, m12], [m12, T::constant(self.m2 * self.l2 * self.l2)]]
    }

    pub fn potential<T: Real>(&self, q: &[T]) -> T {
        -(q[0].cos() * ((self.m1 + self.m2) * self.l1 * G)
            + (q[0] + q[1]).cos() * (self.m2 * self.l2 * G))
    }

    /// `G(q) = −∇V`
    pub fn gravity<T: Real>(&self, q: &[T]) -> [T; 2] {
        let s12 = (q[0] + q[1]).sin() * (self.m2 * self.l2 * G);
        [
            -(q[0].sin() * ((self.m1 + self.m2) * self.l1 * G) + s12),
            -s12,
        ]
    }
}

/// `L = ½ q̇ᵀ M q̇ − V` of [`Arm`] on `x = [q; q̇]`.
pub struct ArmLagrangian(pub Arm);

impl ParamFn for ArmLagrangian {
    fn eval<T: Real>(&self, _p: &[T], x: &[T]) -> T {
        let m = self.0.mass(&x[..2]);
        let (u, v) = (x[2], x[3]);
        (m[0][0] * u * u + m[0][1] * u * v * 2.0 + m[1][1] * v * v) * 0.5
            - self.0.potential(&x[..2])
    }
}

/// Lower factor with `LᵀL = M` and the analytic gravity term of [`Arm`].
pub struct ArmInertia(pub Arm);

impl InertiaFn for ArmInertia {
    fn dof(&self) -> usize {
        2
    }

    fn factor<T: Real>(&self, _p: &[T], q: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
        let m = self.0.mass(q);
        let c = sqrt(m[1][1]);
        let b = m[0][1] / c;
        let a = sqrt(m[0][0] - b * b);
        (
            vec![vec![a, T::zero()], vec![b, c]],
            self.0.gravity(q).to_vec(),
        )
    }
}

/// `L = ½ m l² q̇² + m g l cos q`
pub struct PendulumLagrangian {
    pub m: f64,
    pub l: f64,
}

impl ParamFn for PendulumLagrangian {
    fn eval<T: Real>(&self, _p: &[T], x: &[T]) -> T {
        x[1] * x[1] * (0.5 * self.m * self.l * self.l) + x[0].cos() * (self.m * G * self.l)
    }
}

pub struct PendulumInertia {
    pub m: f64,
    pub l: f64,
}

impl InertiaFn for PendulumInertia {
    fn dof(&self) -> usize {
        1
    }

    fn factor<T: Real>(&self, _p: &[T], q: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
        (
            vec![vec![T::constant(self.l * self.m.sqrt())]],
            vec![-(q[0].sin() * (self.m * G * self.l))],
        )
    }
}

/// `t ↦ (q, q̇, q̈)`
pub type Motion = fn(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>);

/// Samples `q(t) = f(t)` with analytic derivatives at `t = kΔt`.
pub fn analytic_trajectory(
    f: impl Fn(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
    dt: f64,
    duration: f64,
) -> Vec<JointState> {
    let steps = (duration / dt).round() as usize;
    (0..=steps)
        .map(|k| {
            let (q, qd, qdd) = f(k as f64 * dt);
            JointState::new(q, qd, qdd)
        })
        .collect()
}

/// `q = sin t`
pub fn sine(t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (vec![t.sin()], vec![t.cos()], vec![-t.sin()])
}

/// `q = (sin t, 0.8 cos 1.5t)`
pub fn two_link_motion(t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        vec![t.sin(), 0.8 * (1.5 * t).cos()],
        vec![t.cos(), -1.2 * (1.5 * t).sin()],
        vec![-t.sin(), -1.8 * (1.5 * t).cos()],
    )
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Noiseless pendulum with viscous friction only, two periods of a
/// single-joint excitation, normalized and split.
pub fn viscous_pendulum(theta: f64) -> (RobotModel, Dataset) {
    let robot = RobotModel::pendulum(1.2, 0.5)
        .unwrap()
        .with_friction(FrictionCoefficients::viscous(vec![theta]))
        .unwrap();
    let traj = FourierTrajectory {
        period: 4.0,
        dt: 0.01,
        repetitions: 2,
        joints: vec![idnets::data::FourierJoint {
            a0: 0.2,
            a: [0.9, 0.3, 0.1],
            b: [0.2, -0.2, 0.05],
        }],
        limits: None,
    };
    let raw = synthesize_dataset(
        &robot,
        &traj,
        &NoiseConfig::none(),
        0,
        TargetKind::MotorTorque,
    )
    .unwrap();
    (robot, normalize_split(&raw).unwrap())
}

/// Generator output at the exact trajectory samples, bypassing the
/// measurement path.
pub fn exact_samples(
    robot: &RobotModel,
    traj: &FourierTrajectory,
) -> Vec<idnets::data::TrajectorySample> {
    traj.times()
        .into_iter()
        .map(|t| {
            let s = traj.eval(t).unwrap();
            let y =
                idnets::dynamics::motor_torque(robot, &s, &robot.ground_truth_friction).unwrap();
            idnets::data::TrajectorySample {
                t,
                q: s.q,
                qd: s.qd,
                qdd: s.qdd,
                y,
            }
        })
        .collect()
}

/// The default surrogate pipeline: noisy synthesis, filtering, split.
pub fn surrogate_dataset(robot: &RobotModel, seed: u64) -> Dataset {
    let traj = FourierTrajectory::surrogate_default();
    let raw = synthesize_dataset(
        robot,
        &traj,
        &NoiseConfig::default(),
        seed,
        TargetKind::MotorTorque,
    )
    .unwrap();
    normalize_split(
        &idnets::data::preprocess(&raw, &idnets::data::PreprocessConfig::default()).unwrap(),
    )
    .unwrap()
}

pub const PROBES: usize = 1000;

/// First output of a fixed network, as a function of its input.
pub struct Net(pub NetworkParams);

impl ScalarFn for Net {
    fn eval<T: Real>(&self, x: &[T]) -> T {
        let p: Vec<T> = self.0.values.iter().map(|&v| T::constant(v)).collect();
        mlp_eval(&self.0.layers, &p, x)[0]
    }
}

/// `f` at a fixed input, as a function of the network parameters.
pub struct AtInput<'a> {
    pub layers: &'a NetworkParams,
    pub x: Vec<f64>,
}

impl ScalarFn for AtInput<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> T {
        let x: Vec<T> = self.x.iter().map(|&v| T::constant(v)).collect();
        let y = mlp_eval(&self.layers.layers, p, &x);
        y[0] * y[0]
    }
}

pub fn probe(r: &mut ChaCha8Rng, dim: usize) -> (Net, Vec<f64>) {
    let spec = MlpSpec::new(dim, 1, 2, 8);
    let mut p = init_params(&spec, InitScheme::UniformFan, r.random()).unwrap();
    for v in p.values.iter_mut() {
        *v += r.random_range(-0.3..0.3);
    }
    let x = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
    (Net(p), x)
}

pub fn central(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

pub fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1.0)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Worst relative error of [`grad`] against central differences over
/// [`PROBES`] random width-8 depth-2 networks.
pub fn gradient_fd_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..PROBES {
        let (f, x) = probe(&mut r, 1 + k % 4);
        let g = grad(&f, &x);
        let scale = inf_norm(&g);
        for i in 0..x.len() {
            worst = worst.max(rel(g[i], central(|y| f.eval(y), &x, i, 1e-5), scale));
        }
    }
    worst
}

/// Worst relative error of [`hessian`] against differences of the gradient.
pub fn hessian_fd_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..PROBES {
        let (f, x) = probe(&mut r, 1 + k % 4);
        let h = hessian(&f, &x);
        let scale = h.amax();
        for j in 0..x.len() {
            for i in 0..x.len() {
                let fd = central(|y| grad(&f, y)[i], &x, j, 1e-5);
                worst = worst.max(rel(h[(i, j)], fd, scale));
            }
        }
    }
    worst
}

/// Worst relative error of [`mixed_jacobian`] against differences of the
/// gradient; also checks it equals the off-diagonal Hessian block.
pub fn mixed_fd_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..PROBES {
        let split = 1 + k % 3;
        let (f, x) = probe(&mut r, 2 * split);
        let (a, b) = x.split_at(split);
        let m = mixed_jacobian(&f, a, b);
        let h = hessian(&f, &x);
        let scale = m.amax();
        for i in 0..split {
            for j in 0..split {
                assert!((m[(i, j)] - h[(i, split + j)]).abs() <= 1e-12 * scale.max(1.0));
                let fd = central(|y| grad(&f, y)[i], &x, split + j, 1e-5);
                worst = worst.max(rel(m[(i, j)], fd, scale));
            }
        }
    }
    worst
}

/// Worst relative error of [`param_gradient`] against central differences
/// in the parameters.
pub fn param_gradient_fd_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..PROBES {
        let (f, x) = probe(&mut r, 1 + k % 4);
        let loss = AtInput { layers: &f.0, x };
        let p = f.0.values.clone();
        let g = param_gradient(&loss, &p);
        let scale = inf_norm(&g);
        for i in 0..p.len() {
            worst = worst.max(rel(g[i], central(|q| loss.eval(q), &p, i, 1e-5), scale));
        }
    }
    worst
}
