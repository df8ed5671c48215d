//! Inverse dynamics of a pendulum and a two-link arm: RNEA against the
//! Euler-Lagrange oracle, the mass matrix, and the power balance along a
//! smooth motion.

use idnets::dynamics::{
    euler_lagrange_oracle, gravity_torque, mass_matrix, power_balance_residual, rnea, JointState,
    RobotModel,
};

fn main() -> idnets::Result<()> {
    let pendulum = RobotModel::pendulum(1.0, 0.5)?;
    for q in [0.0, 0.5, std::f64::consts::FRAC_PI_2] {
        let s = JointState::new(vec![q], vec![1.0], vec![2.0]);
        let tau = rnea(&pendulum, &s)?[0];
        let expected = 0.25 * 2.0 + 9.81 * 0.5 * q.sin();
        println!("pendulum q = {q:.3}: rnea {tau:.6}  m l² q̈ + m g l sin q = {expected:.6}");
    }

    let arm = RobotModel::planar_arm(&[1.0, 0.7], &[0.6, 0.4])?;
    let s = JointState::new(vec![0.3, -0.8], vec![1.2, -0.5], vec![0.4, 2.0]);
    let a = rnea(&arm, &s)?;
    let b = euler_lagrange_oracle(&arm, &s)?;
    println!("\ntwo-link arm");
    println!("  rnea     {:?}", a);
    println!("  oracle   {:?}", b);
    println!("  gravity  {:?}", gravity_torque(&arm, &s.q)?);
    println!("  M(q) = {}", mass_matrix(&arm, &s.q)?);

    for dt in [2e-3, 1e-3, 5e-4] {
        let traj: Vec<JointState> = (0..=(3.0 / dt) as usize)
            .map(|k| {
                let t = k as f64 * dt;
                JointState::new(
                    vec![t.sin(), 0.8 * (1.5 * t).cos()],
                    vec![t.cos(), -1.2 * (1.5 * t).sin()],
                    vec![-t.sin(), -1.8 * (1.5 * t).cos()],
                )
            })
            .collect();
        let worst = power_balance_residual(&arm, &traj, dt)?
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        println!("power balance dt = {dt:.0e}: max |q̇ᵀτ − dE/dt| = {worst:.3e}");
    }
    Ok(())
}
