//! Trains RNEA+MLP on the surrogate: the rigid-body model supplies the
//! conservative torques and a small network learns the friction residual
//! from (q, q̇). Reports test RMSE and how well the learned dissipative
//! torque matches the generator's.

use idnets::data::{
    normalize_split, preprocess, synthesize_dataset, FourierTrajectory, NoiseConfig,
    PreprocessConfig, TargetKind,
};
use idnets::dynamics::RobotModel;
use idnets::eval::{dissipative_for_samples, rmse_per_joint, true_dissipative, Units};
use idnets::nets::Variant;
use idnets::training::{train, TrainConfig};

fn main() -> idnets::Result<()> {
    env_logger::init();
    let robot = RobotModel::surrogate();
    let raw = synthesize_dataset(
        &robot,
        &FourierTrajectory::surrogate_default(),
        &NoiseConfig::default(),
        0,
        TargetKind::MotorTorque,
    )?;
    let ds = normalize_split(&preprocess(&raw, &PreprocessConfig::default())?)?;

    let cfg = TrainConfig {
        lr: 3e-3,
        epochs: 500,
        ..TrainConfig::for_variant(Variant::RneaMlp)
    };
    let (model, report) = train(&ds, Some(&robot), &cfg, 0)?;
    let losses = &report.epoch_losses;
    for e in [0, losses.len() / 4, losses.len() / 2, losses.len() - 1] {
        println!("epoch {e:4}  loss {:.3e}", losses[e]);
    }
    println!(
        "best epoch {} ({:?}, {:.1} s)",
        report.best_epoch, report.status, report.seconds
    );

    let norm = ds.normalization()?;
    println!(
        "test RMSE, normalized: {:?}",
        rmse_per_joint(&model, ds.test(), norm, Units::Normalized)?
    );
    println!(
        "test RMSE, N·m:        {:?}",
        rmse_per_joint(&model, ds.test(), norm, Units::Physical)?
    );

    let est = dissipative_for_samples(&model, &robot, ds.test())?;
    let truth = true_dissipative(&robot, ds.test());
    for i in 0..ds.dof() {
        let mae = est
            .iter()
            .zip(&truth)
            .map(|(e, t)| (e[i] - t[i]).abs())
            .sum::<f64>()
            / est.len() as f64;
        let peak = truth.iter().map(|t| t[i].abs()).fold(0.0, f64::max);
        println!(
            "joint {}: dissipative MAE {mae:.4} N·m, peak |τ_D| {peak:.3} N·m",
            i + 1
        );
    }
    Ok(())
}
