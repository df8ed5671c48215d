//! RNEA+LQ: the rigid-body model plus a viscous term fitted in closed form.
//! Noiseless data recovers the generator's coefficients; measurement noise
//! and the Coulomb term bias them.

use idnets::data::{
    normalize_split, preprocess, synthesize_dataset, FourierTrajectory, NoiseConfig,
    PreprocessConfig, TargetKind,
};
use idnets::dynamics::{FrictionCoefficients, RobotModel};
use idnets::nets::rnea_lq_fit;

fn main() -> idnets::Result<()> {
    let traj = FourierTrajectory::surrogate_default();
    let theta = vec![8.0, 5.0, 2.0];
    let viscous =
        RobotModel::surrogate().with_friction(FrictionCoefficients::viscous(theta.clone()))?;

    let raw = synthesize_dataset(
        &viscous,
        &traj,
        &NoiseConfig::none(),
        0,
        TargetKind::MotorTorque,
    )?;
    let fit = rnea_lq_fit(
        &viscous,
        normalize_split(&raw)?.train(),
        TargetKind::MotorTorque,
    )?;
    println!("noiseless, viscous only");
    println!("  true θ   {theta:?}");
    println!("  fitted θ {:?}", fit.friction.viscous);

    let robot = RobotModel::surrogate();
    let raw = synthesize_dataset(
        &robot,
        &traj,
        &NoiseConfig::default(),
        0,
        TargetKind::MotorTorque,
    )?;
    let ds = normalize_split(&preprocess(&raw, &PreprocessConfig::default())?)?;
    let fit = rnea_lq_fit(&robot, ds.train(), TargetKind::MotorTorque)?;
    println!("\nnoisy, viscous + Coulomb generator");
    println!(
        "  true θ {:?}, c {:?}",
        robot.ground_truth_friction.viscous, robot.ground_truth_friction.coulomb
    );
    println!("  fitted θ {:?}", fit.friction.viscous);
    Ok(())
}
