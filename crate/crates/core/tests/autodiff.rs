mod common;

use common::{
    central, gradient_fd_error, hessian_fd_error, mixed_fd_error, param_gradient_fd_error, rng,
    small_dataset,
};
use idnets::autodiff::{param_gradient, Real, ScalarFn};
use idnets::data::TargetKind;
use idnets::nets::{delan_torque_at, lnn_torque_at, IdModel, ModelConfig, Variant};
use rand::Rng;

#[test]
fn gradient_matches_finite_differences() {
    let worst = gradient_fd_error(21);
    assert!(worst <= 1e-7, "worst relative error {worst:e}");
}

#[test]
fn hessian_matches_finite_differences_of_gradient() {
    let worst = hessian_fd_error(22);
    assert!(worst <= 1e-4, "worst relative error {worst:e}");
}

#[test]
fn mixed_block_matches_finite_differences_and_hessian() {
    let worst = mixed_fd_error(23);
    assert!(worst <= 1e-4, "worst relative error {worst:e}");
}

#[test]
fn parameter_gradient_matches_finite_differences() {
    let worst = param_gradient_fd_error(24);
    assert!(worst <= 1e-7, "worst relative error {worst:e}");
}

fn model(variant: Variant, seed: u64) -> (IdModel, idnets::nets::Features) {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let mut m = IdModel::new(
        variant,
        &ModelConfig::sized(2, 8),
        ds.normalization().unwrap(),
        TargetKind::MotorTorque,
        Some(&robot),
        seed,
    )
    .unwrap();
    let mut r = rng(seed + 100);
    let p: Vec<f64> = m
        .params()
        .iter()
        .map(|v| v + r.random_range(-0.2..0.2))
        .collect();
    m.set_params(&p);
    let f = m.features_for(&ds.train()[..24]).unwrap();
    (m, f)
}

#[test]
fn batched_jets_match_nested_duals() {
    let (_, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    for variant in [Variant::Lnn, Variant::LnnMlp, Variant::Delan] {
        let (m, f) = model(variant, 5);
        let jets = m.predict_features(&f).unwrap();
        let n = m.dof;
        for (k, s) in ds.train()[..24].iter().enumerate() {
            let state = idnets::dynamics::JointState::new(s.q.clone(), s.qd.clone(), s.qdd.clone());
            let dual = m.predict_reference(&state).unwrap();
            for i in 0..n {
                let a = jets[k * n + i];
                assert!(
                    (a - dual[i]).abs() <= 1e-9 * (1.0 + a.abs()),
                    "{variant} sample {k}: {a} vs {}",
                    dual[i]
                );
            }
        }
    }
}

#[test]
fn training_gradient_matches_finite_differences() {
    for variant in [
        Variant::Mlp,
        Variant::RneaMlp,
        Variant::Lnn,
        Variant::LnnMlp,
        Variant::Delan,
    ] {
        let (mut m, f) = model(variant, 6);
        let idx: Vec<usize> = (0..f.len).collect();
        let p = m.params();
        let mut g = vec![0.0; p.len()];
        m.mse_and_grad(&f, &idx, Some(&mut g)).unwrap();
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut worst: f64 = 0.0;
        for i in (0..p.len()).step_by(7) {
            let fd = central(
                |q| {
                    m.set_params(q);
                    m.mse_and_grad(&f, &idx, None).unwrap()
                },
                &p,
                i,
                1e-6,
            );
            worst = worst.max((g[i] - fd).abs() / scale.max(1e-8));
        }
        assert!(worst <= 1e-4, "{variant}: worst relative error {worst:e}");
    }
}

/// Squared normalized error of a pure physics network, built on the tape.
struct PhysicsLoss<'a> {
    model: &'a IdModel,
    samples: &'a [idnets::data::TrajectorySample],
    y: &'a [f64],
}

impl ScalarFn for PhysicsLoss<'_> {
    fn eval<T: Real>(&self, p: &[T]) -> T {
        let sc = self.model.scales();
        let n = self.model.dof;
        let c = |v: &[f64]| v.iter().map(|&x| T::constant(x)).collect::<Vec<T>>();
        let mut loss = T::zero();
        for (k, s) in self.samples.iter().enumerate() {
            let (q, qd, qdd) = (c(&s.q), c(&s.qd), c(&s.qdd));
            let tau = match self.model.variant {
                Variant::Lnn => lnn_torque_at(&self.model.lnn_fn(&sc), p, &q, &qd, &qdd),
                _ => delan_torque_at(&self.model.delan_fn(&sc), p, &q, &qd, &qdd),
            };
            for i in 0..n {
                let r = tau[i] * sc.a_y[i] + T::constant(sc.b_y[i] - self.y[k * n + i]);
                loss = loss + r * r;
            }
        }
        loss * T::constant(1.0 / (self.samples.len() * n) as f64)
    }
}

#[test]
fn tape_through_hessian_matches_batched_backward() {
    let (_, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let samples = &ds.train()[..6];
    for variant in [Variant::Lnn, Variant::Delan] {
        let (m, _) = model(variant, 7);
        let f = m.features_for(samples).unwrap();
        let idx: Vec<usize> = (0..samples.len()).collect();
        let mut g = vec![0.0; m.param_len()];
        let batched = m.mse_and_grad(&f, &idx, Some(&mut g)).unwrap();
        let loss = PhysicsLoss {
            model: &m,
            samples,
            y: f.y.as_ref().unwrap(),
        };
        let p = m.params();
        assert!((loss.eval(&p) - batched).abs() <= 1e-9 * (1.0 + batched));
        let tape = param_gradient(&loss, &p);
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..p.len() {
            assert!(
                (tape[i] - g[i]).abs() <= 1e-7 * scale,
                "{variant} param {i}: {} vs {}",
                tape[i],
                g[i]
            );
        }
    }
}
