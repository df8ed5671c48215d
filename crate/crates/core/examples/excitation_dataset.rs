//! Builds the surrogate dataset: Fourier excitation, noisy currents and
//! velocities, zero-phase filtering, differentiation, normalization and the
//! chronological split, then writes it as CSV with its sidecar.

use idnets::data::{
    load_csv, normalize_split, preprocess, save_csv, synthesize_dataset, FourierTrajectory,
    NoiseConfig, PreprocessConfig, TargetKind,
};
use idnets::dynamics::RobotModel;

fn main() -> idnets::Result<()> {
    let robot = RobotModel::surrogate();
    let traj = FourierTrajectory::surrogate_default();
    traj.validate()?;
    let [q, qd, qdd] = traj.peaks();
    println!(
        "period {} s, dt {} s, {} samples",
        traj.period,
        traj.dt,
        traj.sample_count()
    );
    for i in 0..traj.dof() {
        println!(
            "  joint {}: |q| ≤ {:.3}  |q̇| ≤ {:.3}  |q̈| ≤ {:.3}",
            i + 1,
            q[i],
            qd[i],
            qdd[i]
        );
    }

    let raw = synthesize_dataset(
        &robot,
        &traj,
        &NoiseConfig::default(),
        0,
        TargetKind::MotorTorque,
    )?;
    let ds = normalize_split(&preprocess(&raw, &PreprocessConfig::default())?)?;
    let norm = ds.normalization()?;
    println!("\ntrain {}  test {}", ds.train().len(), ds.test().len());
    for i in 0..ds.dof() {
        println!(
            "  τ_u,{} ∈ [{:.3}, {:.3}] N·m on the training slice",
            i + 1,
            norm.y.min[i],
            norm.y.max[i]
        );
    }

    let path = std::env::temp_dir().join("idnets_surrogate.csv");
    save_csv(&path, &ds, Some(0))?;
    let (back, _) = load_csv(&path)?;
    println!(
        "\nwrote {}; reload identical: {}",
        path.display(),
        back.samples == ds.samples
    );
    Ok(())
}
