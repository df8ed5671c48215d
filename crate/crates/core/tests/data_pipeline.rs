mod common;

use common::small_dataset;
use idnets::data::{
    differentiate, load_csv, lowpass_zero_phase, normalize_split, preprocess, save_csv,
    synthesize_dataset, Dataset, FourierJoint, FourierTrajectory, NoiseConfig, PreprocessConfig,
    TargetKind, TrajectorySample,
};
use idnets::dynamics::RobotModel;
use proptest::prelude::*;
use std::f64::consts::PI;

fn max_fd_error(traj: &FourierTrajectory) -> f64 {
    let times = traj.times();
    let states: Vec<_> = times.iter().map(|&t| traj.eval(t).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..traj.dof() {
        let q: Vec<f64> = states.iter().map(|s| s.q[i]).collect();
        let d = differentiate(&q, traj.dt).unwrap();
        for (k, s) in states.iter().enumerate() {
            worst = worst.max((d[k] - s.qd[i]).abs());
        }
    }
    worst
}

#[test]
fn fourier_velocity_matches_differences_at_second_order() {
    let mut traj = FourierTrajectory::surrogate_default();
    traj.dt = 0.01;
    let coarse = max_fd_error(&traj);
    traj.dt = 0.005;
    let fine = max_fd_error(&traj);
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn excitation_is_periodic() {
    let traj = FourierTrajectory::surrogate_default();
    let a = traj.eval(0.0).unwrap();
    let b = traj.eval(traj.period).unwrap();
    for i in 0..traj.dof() {
        assert!((a.q[i] - b.q[i]).abs() <= 1e-12);
        assert!((a.qd[i] - b.qd[i]).abs() <= 1e-12);
        assert!((a.qdd[i] - b.qdd[i]).abs() <= 1e-11);
    }
}

fn sine(freq: f64, dt: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (2.0 * PI * freq * k as f64 * dt).sin())
        .collect()
}

#[test]
fn low_frequency_passes_with_unit_gain_and_no_lag() {
    let (fc, dt) = (4.0, 0.001);
    let f = fc / 20.0;
    let n = 40_000;
    let x = sine(f, dt, n);
    let y = lowpass_zero_phase(&x, fc, dt).unwrap();
    // least-squares fit of y ≈ a sin + b cos away from the ends
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in n / 4..3 * n / 4 {
        let w = 2.0 * PI * f * k as f64 * dt;
        let (s, c) = w.sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += y[k] * s;
        yc += y[k] * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    let gain = a.hypot(b);
    let lag = b.atan2(a);
    assert!((gain - 1.0).abs() <= 0.01, "gain {gain}");
    assert!(lag.abs() <= 1e-9, "phase {lag}");
}

#[test]
fn high_frequency_is_attenuated() {
    let (fc, dt) = (4.0, 0.001);
    let x = sine(20.0 * fc, dt, 20_000);
    let y = lowpass_zero_phase(&x, fc, dt).unwrap();
    let peak = y[5000..15000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(peak < 0.01, "{peak}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_commutes_with_time_reversal(x in prop::collection::vec(-5.0f64..5.0, 3..200), fc in 0.5f64..40.0) {
        let dt = 0.01;
        let y = lowpass_zero_phase(&x, fc, dt).unwrap();
        let mut xr = x.clone();
        xr.reverse();
        let mut yr = lowpass_zero_phase(&xr, fc, dt).unwrap();
        yr.reverse();
        for (a, b) in y.iter().zip(&yr) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn filter_preserves_constants(c in -100.0f64..100.0, n in 3usize..100) {
        let y = lowpass_zero_phase(&vec![c; n], 2.0, 0.01).unwrap();
        for v in y {
            prop_assert!((v - c).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn normalization_never_reads_the_test_slice(seed in any::<u64>(), scale in -1e3f64..1e3) {
        let (_, ds) = small_dataset(TargetKind::MotorTorque, 1.0);
        let mut raw = Dataset::new(ds.samples.clone(), ds.target, ds.dt);
        let before = normalize_split(&raw).unwrap();
        let split = before.split.unwrap();
        let mut r = common::rng(seed);
        for s in &mut raw.samples[split..] {
            for v in s.q.iter_mut().chain(&mut s.qd).chain(&mut s.qdd).chain(&mut s.y) {
                *v = scale * rand::Rng::random_range(&mut r, -1.0..1.0);
            }
        }
        let after = normalize_split(&raw).unwrap();
        prop_assert_eq!(before.normalization, after.normalization);
        prop_assert_eq!(before.split, after.split);
    }

    #[test]
    fn split_is_seventy_thirty(n in 10usize..500) {
        let samples = (0..n)
            .map(|k| TrajectorySample {
                t: k as f64,
                q: vec![k as f64],
                qd: vec![1.0],
                qdd: vec![0.0],
                y: vec![-(k as f64)],
            })
            .collect();
        let ds = normalize_split(&Dataset::new(samples, TargetKind::JointTorque, 1.0)).unwrap();
        prop_assert_eq!(ds.train().len(), 7 * n / 10);
        prop_assert_eq!(ds.train().len() + ds.test().len(), n);
    }
}

#[test]
fn ten_samples_split_seven_three() {
    let (_, ds) = small_dataset(TargetKind::MotorTorque, 1.0);
    let raw = Dataset::new(ds.samples[..10].to_vec(), ds.target, ds.dt);
    let d = normalize_split(&raw).unwrap();
    assert_eq!((d.train().len(), d.test().len()), (7, 3));
    let raw = Dataset::new(ds.samples[..9].to_vec(), ds.target, ds.dt);
    assert!(normalize_split(&raw).is_err());
}

fn noisy(seed: u64) -> Dataset {
    let robot = RobotModel::surrogate();
    let traj = FourierTrajectory::surrogate_default();
    let raw = synthesize_dataset(
        &robot,
        &traj,
        &NoiseConfig::default(),
        seed,
        TargetKind::MotorTorque,
    )
    .unwrap();
    normalize_split(&preprocess(&raw, &PreprocessConfig::default()).unwrap()).unwrap()
}

#[test]
fn synthesis_is_deterministic_per_seed() {
    let a = noisy(9);
    assert_eq!(a, noisy(9));
    assert_ne!(a, noisy(10));
    assert_eq!(a.len(), 1251);
}

#[test]
fn csv_round_trip_is_exact() {
    let ds = noisy(4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    save_csv(&path, &ds, Some(4)).unwrap();
    let (back, meta) = load_csv(&path).unwrap();
    let meta = meta.unwrap();
    assert_eq!(back.samples, ds.samples);
    assert_eq!(meta.seed, Some(4));
    assert_eq!(meta.split, ds.split);
    assert_eq!(meta.normalization, ds.normalization);
}

#[test]
fn noise_free_velocity_pipeline_recovers_acceleration() {
    let robot = RobotModel::surrogate();
    let traj = FourierTrajectory::surrogate_default();
    let raw = synthesize_dataset(
        &robot,
        &traj,
        &NoiseConfig::none(),
        0,
        TargetKind::JointTorque,
    )
    .unwrap();
    let peak: f64 = raw
        .samples
        .iter()
        .flat_map(|s| s.qdd.iter())
        .fold(0.0, |m, v| m.max(v.abs()));
    for (k, s) in raw.samples.iter().enumerate().skip(1).take(raw.len() - 2) {
        let exact = traj.eval(s.t).unwrap();
        for i in 0..3 {
            assert!(
                (s.qdd[i] - exact.qdd[i]).abs() <= 1e-3 * peak,
                "sample {k} joint {i}"
            );
        }
    }
}

#[test]
fn single_joint_trajectory_evaluates() {
    let traj = FourierTrajectory {
        period: 2.0,
        dt: 0.01,
        repetitions: 1,
        joints: vec![FourierJoint {
            a0: 0.0,
            a: [0.0, 1.0, 0.0],
            b: [0.0; 3],
        }],
        limits: None,
    };
    let s = traj.eval(0.25).unwrap();
    // q = sin(2ωt) with ω = π
    assert!((s.q[0] - (2.0 * PI * 0.25).sin()).abs() < 1e-14);
    assert!((s.qd[0] - 2.0 * PI * (2.0 * PI * 0.25).cos()).abs() < 1e-13);
}
