//! Euler-Lagrange torque assembly on the general autodiff engine.
//!
//! These functions take the Lagrangian, or the inertia factor and gravity
//! term, as code written against [`Real`], so the same assembly serves
//! analytically frozen components and network-backed ones. Evaluated at
//! [`Var`](crate::autodiff::Var) parameters they also yield parameter
//! gradients through the second-order input derivatives.

use crate::autodiff::{gradient_at, hessian_at, Dual, ParamFn, Real};

/// `τ = (∇_q̇∇_q̇ᵀL) q̈ + (∇_q∇_q̇ᵀL)ᵀ-block q̇ − ∇_q L` for a Lagrangian
/// `L(params; [q; q̇])`.
pub fn lnn_torque_at<T: Real>(
    lagrangian: &impl ParamFn,
    params: &[T],
    q: &[T],
    qd: &[T],
    qdd: &[T],
) -> Vec<T> {
    let n = q.len();
    let x: Vec<T> = q.iter().chain(qd).copied().collect();
    let h = hessian_at(lagrangian, params, &x);
    let g = gradient_at(lagrangian, params, &x);
    (0..n)
        .map(|i| {
            let mut t = -g[i];
            for j in 0..n {
                t = t + h[n + i][n + j] * qdd[j] + h[n + i][j] * qd[j];
            }
            t
        })
        .collect()
}

/// An inertia matrix `M(q) = L(q)ᵀ L(q)` given by a lower-triangular factor,
/// together with the generalized gravity term `G(q)`.
pub trait InertiaFn {
    fn dof(&self) -> usize;

    /// `(L, G)`; `L[i][j]` is read for `j ≤ i` only.
    fn factor<T: Real>(&self, params: &[T], q: &[T]) -> (Vec<Vec<T>>, Vec<T>);
}

/// `τ = M q̈ + ∇_q(q̇ᵀM) q̇ − ½ ∇_q(q̇ᵀ M q̇) − G`.
pub fn delan_torque_at<T: Real>(
    f: &impl InertiaFn,
    params: &[T],
    q: &[T],
    qd: &[T],
    qdd: &[T],
) -> Vec<T> {
    let n = q.len();
    let p: Vec<Dual<T>> = params.iter().map(|&v| Dual::lift(v)).collect();
    let along = |dir: &dyn Fn(usize) -> T| {
        let qx: Vec<Dual<T>> = (0..n).map(|k| Dual::new(q[k], dir(k))).collect();
        f.factor(&p, &qx)
    };
    // L and L̇ = Σ_k q̇_k ∂_k L from one directional sweep.
    let (ld, g) = along(&|k| qd[k]);
    let l = |i: usize, j: usize| if j <= i { ld[i][j].re } else { T::zero() };
    let l_dot = |i: usize, j: usize| if j <= i { ld[i][j].eps } else { T::zero() };
    let lv = |m: &dyn Fn(usize, usize) -> T, v: &[T]| -> Vec<T> {
        (0..n)
            .map(|i| (0..=i).fold(T::zero(), |acc, j| acc + m(i, j) * v[j]))
            .collect()
    };
    let ltv = |m: &dyn Fn(usize, usize) -> T, v: &[T]| -> Vec<T> {
        (0..n)
            .map(|j| (j..n).fold(T::zero(), |acc, i| acc + m(i, j) * v[i]))
            .collect()
    };
    let lu = lv(&l, qd);
    let lw = lv(&l, qdd);
    let ldu = lv(&l_dot, qd);
    let m_qdd = ltv(&l, &lw);
    let a = ltv(&l_dot, &lu);
    let b = ltv(&l, &ldu);
    (0..n)
        .map(|i| {
            let (di, _) = along(&|k| if k == i { T::constant(1.0) } else { T::zero() });
            let dl = |r: usize, c: usize| if c <= r { di[r][c].eps } else { T::zero() };
            let dlu = lv(&dl, qd);
            let half_grad = dlu
                .iter()
                .zip(&lu)
                .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            m_qdd[i] + a[i] + b[i] - half_grad - g[i].re
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `L = ½ q̇² + 9.81 cos q`
    struct Pendulum;
    impl ParamFn for Pendulum {
        fn eval<T: Real>(&self, _p: &[T], x: &[T]) -> T {
            x[1] * x[1] * 0.5 + x[0].cos() * 9.81
        }
    }

    #[test]
    fn frozen_pendulum_lagrangian() {
        let t = lnn_torque_at(
            &Pendulum,
            &[],
            &[std::f64::consts::FRAC_PI_2],
            &[0.0],
            &[0.0],
        );
        assert!((t[0] - 9.81).abs() < 1e-12);
        let t = lnn_torque_at(&Pendulum, &[], &[0.3], &[1.7], &[-2.0]);
        assert!((t[0] - (-2.0 + 9.81 * 0.3f64.sin())).abs() < 1e-12);
    }

    /// Unit inertia with a constant gravity term.
    struct Constant;
    impl InertiaFn for Constant {
        fn dof(&self) -> usize {
            2
        }
        fn factor<T: Real>(&self, _p: &[T], _q: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
            let one = T::constant(1.0);
            let z = T::zero();
            (
                vec![vec![one, z], vec![z, one]],
                vec![T::constant(0.5), T::constant(-2.0)],
            )
        }
    }

    #[test]
    fn constant_inertia_is_newtonian() {
        let t = delan_torque_at(&Constant, &[], &[0.2, 0.4], &[3.0, -1.0], &[1.5, 2.5]);
        assert_eq!(t, vec![1.0, 4.5]);
    }
}
