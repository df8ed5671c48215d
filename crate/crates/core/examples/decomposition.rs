//! Splits the surrogate's motor-side torque into point-mass, rotational
//! inertia, motor inertia and friction contributions, showing that friction
//! dominates what the networks have to learn.

use idnets::data::{synthesize_dataset, FourierTrajectory, NoiseConfig, TargetKind};
use idnets::dynamics::RobotModel;
use idnets::eval::decompose_contributions;

fn rms(rows: &[Vec<f64>], i: usize) -> f64 {
    (rows.iter().map(|r| r[i] * r[i]).sum::<f64>() / rows.len() as f64).sqrt()
}

fn main() -> idnets::Result<()> {
    let robot = RobotModel::surrogate();
    let ds = synthesize_dataset(
        &robot,
        &FourierTrajectory::surrogate_default(),
        &NoiseConfig::none(),
        0,
        TargetKind::MotorTorque,
    )?;
    let d = decompose_contributions(&robot, &ds.samples)?;
    println!("telescoping error {:.2e}", d.telescoping_error());
    println!(
        "{:>6} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "joint", "mass", "inertia", "motor", "friction", "total"
    );
    let col = |f: fn(&idnets::eval::ContributionRow) -> &Vec<f64>| {
        d.rows.iter().map(|r| f(r).clone()).collect::<Vec<_>>()
    };
    let cols = [
        col(|r| &r.mass),
        col(|r| &r.inertia),
        col(|r| &r.motor_inertia),
        col(|r| &r.friction),
        col(|r| &r.total),
    ];
    for i in 0..robot.dof() {
        print!("{:>6}", i + 1);
        for c in &cols {
            print!(" {:>11.4e}", rms(c, i));
        }
        println!();
    }
    println!("(RMS over the trajectory, N·m)");
    Ok(())
}
