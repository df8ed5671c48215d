//! LNN and DeLaN on a frictionless robot with joint torques as the target,
//! the setting their structure is built for. The learned DeLaN inertia is
//! positive definite by construction.

use idnets::data::{
    normalize_split, preprocess, synthesize_dataset, FourierTrajectory, NoiseConfig,
    PreprocessConfig, TargetKind,
};
use idnets::dynamics::{mass_matrix, FrictionCoefficients, RobotModel};
use idnets::eval::{rmse_per_joint, Units};
use idnets::nets::Variant;
use idnets::training::{train, TrainConfig};
use nalgebra::SymmetricEigen;

fn main() -> idnets::Result<()> {
    env_logger::init();
    let base = RobotModel::surrogate();
    let robot = base.with_friction(FrictionCoefficients::zero(base.dof()))?;
    let raw = synthesize_dataset(
        &robot,
        &FourierTrajectory::surrogate_default(),
        &NoiseConfig::default(),
        0,
        TargetKind::JointTorque,
    )?;
    let ds = normalize_split(&preprocess(&raw, &PreprocessConfig::default())?)?;
    let norm = ds.normalization()?;
    let target_rms: Vec<f64> = (0..ds.dof())
        .map(|i| {
            (ds.test().iter().map(|s| s.y[i] * s.y[i]).sum::<f64>() / ds.test().len() as f64).sqrt()
        })
        .collect();
    println!("test target RMS, N·m: {target_rms:.3?}");

    for variant in [Variant::Delan, Variant::Lnn] {
        let cfg = TrainConfig {
            epochs: 300,
            ..TrainConfig::for_variant(variant)
        };
        let (model, report) = train(&ds, None, &cfg, 0)?;
        let rmse = rmse_per_joint(&model, ds.test(), norm, Units::Physical)?;
        println!(
            "{}: {} epochs in {:.1} s, test RMSE {rmse:.4?} N·m",
            variant.label(),
            report.epoch_losses.len(),
            report.seconds
        );
        if variant == Variant::Delan {
            let q = &ds.test()[0].q;
            let eig = SymmetricEigen::new(model.delan_network_inertia(q)?).eigenvalues;
            let truth = SymmetricEigen::new(mass_matrix(&robot, q)?).eigenvalues;
            println!(
                "  network inertia eigenvalues at a test pose {:.4?} (normalized units)",
                eig.as_slice()
            );
            println!(
                "  true inertia eigenvalues                    {:.4?} (kg·m²)",
                truth.as_slice()
            );
        }
    }
    Ok(())
}
