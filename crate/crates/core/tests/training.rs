mod common;

use std::cell::Cell;

use common::{small_dataset, viscous_pendulum};
use idnets::data::{
    normalize_split, Dataset, FourierTrajectory, Normalization, TargetKind, TrajectorySample,
};
use idnets::dynamics::{motor_side_baseline, JointState, RobotModel};
use idnets::eval::{rmse_per_joint, Units};
use idnets::nets::{IdModel, ModelConfig, Variant};
use idnets::training::{
    mse_loss, select_learning_rate, train, SampleAccess, TrainConfig, TrainStatus,
};

fn quick(variant: Variant, epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        model: ModelConfig::sized(2, 16),
        ..TrainConfig::for_variant(variant)
    }
}

fn fresh(
    variant: Variant,
    robot: &RobotModel,
    ds: &Dataset,
    cfg: &TrainConfig,
    seed: u64,
) -> IdModel {
    IdModel::new(
        variant,
        &cfg.model,
        ds.normalization().unwrap(),
        ds.target,
        Some(robot),
        seed,
    )
    .unwrap()
}

#[test]
fn mse_of_zero_network_is_mean_square_target() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let cfg = quick(Variant::Mlp, 1);
    let mut m = fresh(Variant::Mlp, &robot, &ds, &cfg, 0);
    m.set_params(&vec![0.0; m.param_len()]);
    let f = m.features_for(ds.train()).unwrap();
    let norm = ds.normalization().unwrap();
    for k in [0usize, 17, 90] {
        let y = norm.y.normalize(&ds.train()[k].y);
        let expected = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        assert!((mse_loss(&m, &f, &[k]).unwrap() - expected).abs() <= 1e-15);
    }
}

#[test]
fn mse_is_zero_for_the_generator_and_invariant_to_duplication() {
    let (robot, mut ds) = small_dataset(TargetKind::JointTorque, 2.0);
    // exact accelerations, so the generator reproduces y to roundoff
    let mut traj = FourierTrajectory::surrogate_default();
    traj.period = 2.0;
    for s in &mut ds.samples {
        s.qdd = traj.eval(s.t).unwrap().qdd;
    }
    let (m, _) = train(&ds, Some(&robot), &quick(Variant::RneaLq, 1), 0).unwrap();
    let f = m.features_for(ds.train()).unwrap();
    let idx: Vec<usize> = (0..f.len).collect();
    assert!(mse_loss(&m, &f, &idx).unwrap() <= 1e-20);

    let cfg = quick(Variant::Mlp, 1);
    let m = fresh(Variant::Mlp, &robot, &ds, &cfg, 3);
    let once: Vec<usize> = (0..10).collect();
    let twice: Vec<usize> = once.iter().flat_map(|&k| [k, k]).collect();
    let (a, b) = (
        mse_loss(&m, &f, &once).unwrap(),
        mse_loss(&m, &f, &twice).unwrap(),
    );
    assert!((a - b).abs() <= 1e-15 * a);
    assert!(mse_loss(&m, &f, &[]).is_err());
}

#[test]
fn training_is_bitwise_reproducible() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    for variant in [Variant::RneaMlp, Variant::Lnn, Variant::Delan] {
        let cfg = quick(variant, 5);
        let (a, ra) = train(&ds, Some(&robot), &cfg, 7).unwrap();
        let (b, rb) = train(&ds, Some(&robot), &cfg, 7).unwrap();
        assert_eq!(a.params(), b.params(), "{variant}");
        assert_eq!(ra.epoch_losses, rb.epoch_losses);
        let (c, _) = train(&ds, Some(&robot), &cfg, 8).unwrap();
        assert_ne!(a.params(), c.params());
    }
}

/// Serves the training slice and records the largest index requested.
struct Guarded<'a> {
    ds: &'a Dataset,
    max_index: Cell<usize>,
}

impl SampleAccess for Guarded<'_> {
    fn normalization(&self) -> idnets::Result<&Normalization> {
        self.ds.normalization()
    }
    fn target(&self) -> TargetKind {
        self.ds.target
    }
    fn train_len(&self) -> usize {
        self.ds.train().len()
    }
    fn train_sample(&self, k: usize) -> &TrajectorySample {
        assert!(
            k < self.train_len(),
            "trainer asked for sample {k} beyond the training slice"
        );
        self.max_index.set(self.max_index.get().max(k));
        &self.ds.train()[k]
    }
}

#[test]
fn trainer_never_sees_test_samples() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let mut poisoned = ds.clone();
    let split = ds.split.unwrap();
    for s in &mut poisoned.samples[split..] {
        s.y.iter_mut().for_each(|v| *v = f64::NAN);
        s.qd.iter_mut().for_each(|v| *v = f64::NAN);
    }
    let guard = Guarded {
        ds: &poisoned,
        max_index: Cell::new(0),
    };
    let cfg = quick(Variant::LnnMlp, 3);
    let (a, _) = train(&guard, Some(&robot), &cfg, 1).unwrap();
    let (b, _) = train(&ds, Some(&robot), &cfg, 1).unwrap();
    assert_eq!(a.params(), b.params());
    assert_eq!(guard.max_index.get(), split - 1);
}

#[test]
fn one_small_step_decreases_the_loss() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let n = ds.train().len();
    for variant in [
        Variant::Mlp,
        Variant::RneaMlp,
        Variant::Lnn,
        Variant::LnnMlp,
        Variant::Delan,
    ] {
        let cfg = TrainConfig {
            lr: 1e-6,
            batch_size: n,
            ..quick(variant, 1)
        };
        let before = fresh(variant, &robot, &ds, &cfg, 2);
        let f = before.features_for(ds.train()).unwrap();
        let idx: Vec<usize> = (0..n).collect();
        let (after, report) = train(&ds, Some(&robot), &cfg, 2).unwrap();
        let (l0, l1) = (
            mse_loss(&before, &f, &idx).unwrap(),
            mse_loss(&after, &f, &idx).unwrap(),
        );
        assert_eq!(report.epoch_losses.len(), 1);
        assert!((report.epoch_losses[0] - l0).abs() <= 1e-14 * l0);
        assert!(l1 < l0, "{variant}: {l1} !< {l0}");
    }
}

#[test]
fn mlp_fits_a_zero_target() {
    let (robot, mut ds) = viscous_pendulum(0.8);
    for s in &mut ds.samples {
        s.y.iter_mut().for_each(|v| *v = 0.0);
    }
    let ds = normalize_split(&Dataset::new(ds.samples, ds.target, ds.dt)).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        ..TrainConfig::for_variant(Variant::Mlp)
    };
    let (_, report) = train(&ds, Some(&robot), &cfg, 0).unwrap();
    assert!(report.best_loss <= 1e-6, "{:e}", report.best_loss);
}

#[test]
fn rnea_mlp_learns_viscous_friction() {
    let (robot, ds) = viscous_pendulum(0.5);
    let (m, report) = train(
        &ds,
        Some(&robot),
        &TrainConfig::for_variant(Variant::RneaMlp),
        0,
    )
    .unwrap();
    assert_eq!(report.status, TrainStatus::Completed);
    let rmse =
        rmse_per_joint(&m, ds.test(), ds.normalization().unwrap(), Units::Physical).unwrap()[0];
    let y: Vec<f64> = ds.samples.iter().map(|s| s.y[0]).collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let std = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    assert!(
        rmse <= 0.01 * std,
        "test RMSE {rmse:e} vs target std {std:e}"
    );
    for q in [-0.5, 0.0, 0.4, 0.9] {
        let s = JointState::new(vec![q], vec![1.0], vec![0.0]);
        let h = m.predict(&s).unwrap()[0] - motor_side_baseline(&robot, &s).unwrap()[0];
        assert!((h + 0.5).abs() <= 0.05, "h({q}, 1) = {h}");
    }
}

#[test]
fn least_squares_variant_reports_one_epoch() {
    let (robot, ds) = viscous_pendulum(0.8);
    let (m, report) = train(
        &ds,
        Some(&robot),
        &TrainConfig::for_variant(Variant::RneaLq),
        0,
    )
    .unwrap();
    assert_eq!(report.epoch_losses.len(), 1);
    assert!(report.converged);
    // accelerations are differentiated velocities, so recovery is not exact
    assert!((m.viscous[0] - 0.8).abs() <= 1e-4 * 0.8, "{:?}", m.viscous);
}

#[test]
fn huge_learning_rate_diverges() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let cfg = TrainConfig {
        lr: 1e300,
        ..quick(Variant::Mlp, 20)
    };
    let (_, report) = train(&ds, Some(&robot), &cfg, 0).unwrap();
    assert_eq!(report.status, TrainStatus::Diverged);
    assert!(!report.converged);
    assert!(report.epoch_losses.last().unwrap().is_nan());
}

#[test]
fn invalid_configs_are_rejected() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    for cfg in [
        TrainConfig {
            lr: 0.0,
            ..quick(Variant::Mlp, 1)
        },
        TrainConfig {
            batch_size: 0,
            ..quick(Variant::Mlp, 1)
        },
        TrainConfig {
            epochs: 0,
            ..quick(Variant::Mlp, 1)
        },
        TrainConfig {
            beta1: 1.0,
            ..quick(Variant::Mlp, 1)
        },
    ] {
        assert!(train(&ds, Some(&robot), &cfg, 0).is_err());
    }
    let raw = Dataset::new(ds.samples.clone(), ds.target, ds.dt);
    assert!(train(&raw, Some(&robot), &quick(Variant::Mlp, 1), 0).is_err());
}

#[test]
fn learning_rate_sweep_keeps_lowest_training_loss() {
    let (robot, ds) = small_dataset(TargetKind::MotorTorque, 2.0);
    let sel = select_learning_rate(
        &ds,
        Some(&robot),
        &quick(Variant::RneaMlp, 20),
        &[1e-7, 3e-3],
        0,
    )
    .unwrap();
    assert_eq!(sel.lr, 3e-3);
    assert_eq!(sel.losses.len(), 2);
    assert!(sel.losses[1].1 < sel.losses[0].1);
    assert_eq!(sel.report.lr, 3e-3);
}
