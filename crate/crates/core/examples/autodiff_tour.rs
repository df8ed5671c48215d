//! Exact derivatives of a function written once against `Real`: reverse-mode
//! gradient, nested-dual Hessian, the mixed block, and a parameter gradient
//! taken through a Hessian on the tape.

use idnets::autodiff::{
    grad, gradient_at, hessian, hessian_at, mixed_jacobian, param_gradient, ParamFn, Real, ScalarFn,
};

/// `f(x) = sin(x₀) x₁² + exp(x₀ x₂) + tanh(x₁ x₂)`
struct Example;

impl ScalarFn for Example {
    fn eval<T: Real>(&self, x: &[T]) -> T {
        x[0].sin() * x[1] * x[1] + (x[0] * x[2]).exp() + (x[1] * x[2]).tanh()
    }
}

/// `L(w; q, q̇) = ½ w₀ q̇² + w₁ cos q`
struct Pendulum;

impl ParamFn for Pendulum {
    fn eval<T: Real>(&self, w: &[T], x: &[T]) -> T {
        w[0] * x[1] * x[1] * 0.5 + w[1] * x[0].cos()
    }
}

/// Squared error of the Euler-Lagrange torque at one state, as a function of `w`.
struct TorqueLoss;

impl ScalarFn for TorqueLoss {
    fn eval<T: Real>(&self, w: &[T]) -> T {
        let (q, qd, qdd, target) = (0.4, -1.1, 0.7, 3.0);
        let x = [T::constant(q), T::constant(qd)];
        let h = hessian_at(&Pendulum, w, &x);
        let g = gradient_at(&Pendulum, w, &x);
        let tau = h[1][1] * qdd + h[1][0] * qd - g[0];
        let e = tau - target;
        e * e
    }
}

fn main() {
    let x = [0.3, -0.7, 1.1];
    println!("f(x)   = {:.12}", Example.eval(&x));
    println!("∇f     = {:?}", grad(&Example, &x));
    println!("∇²f    = {}", hessian(&Example, &x));
    println!(
        "∂²f/∂a∂b, a = x₀, b = (x₁, x₂): {}",
        mixed_jacobian(&Example, &x[..1], &x[1..])
    );

    let w = [2.0, 9.0];
    let g = param_gradient(&TorqueLoss, &w);
    let h = 1e-6;
    let fd: Vec<f64> = (0..2)
        .map(|i| {
            let (mut a, mut b) = (w, w);
            a[i] += h;
            b[i] -= h;
            (TorqueLoss.eval(&a) - TorqueLoss.eval(&b)) / (2.0 * h)
        })
        .collect();
    println!("\nloss gradient through the Hessian: {g:?}");
    println!("central differences:               {fd:?}");
}
