//! Exact first and second derivatives of functions written against [`Real`].
//!
//! Gradients at `f64` use one reverse sweep. Hessians and mixed blocks use
//! nested forward duals, one evaluation per (upper-triangular) entry. The
//! `*_at` variants are generic in the scalar type, so evaluating them at
//! [`Var`] records the whole second-order expansion on a tape and a reverse
//! sweep then yields parameter gradients *through* the Hessian.

use nalgebra::DMatrix;

use super::{Dual, Real, Tape};

/// A scalar function of one vector.
pub trait ScalarFn {
    fn eval<T: Real>(&self, x: &[T]) -> T;
}

/// A scalar function of a parameter vector and an input vector.
pub trait ParamFn {
    fn eval<T: Real>(&self, params: &[T], x: &[T]) -> T;
}

/// A vector-valued function of one vector.
pub trait VectorFn {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T>;
}

struct NoParams<'a, F>(&'a F);

impl<F: ScalarFn> ParamFn for NoParams<'_, F> {
    fn eval<T: Real>(&self, _params: &[T], x: &[T]) -> T {
        self.0.eval(x)
    }
}

/// Exact gradient by one reverse sweep.
pub fn grad(f: &impl ScalarFn, x: &[f64]) -> Vec<f64> {
    let tape = Tape::with_capacity(64 * x.len().max(1));
    let xs = tape.vars(x);
    let y = f.eval(&xs);
    tape.gradient(y, &xs)
}

/// Gradient of a loss with respect to its parameter vector.
///
/// The loss may itself call [`hessian_at`], [`mixed_at`] or
/// [`gradient_at`] on input derivatives; those are recorded and
/// differentiated through.
pub fn param_gradient(loss: &impl ScalarFn, params: &[f64]) -> Vec<f64> {
    grad(loss, params)
}

/// Exact Hessian, symmetric by construction.
pub fn hessian(f: &impl ScalarFn, x: &[f64]) -> DMatrix<f64> {
    let h = hessian_at(&NoParams(f), &[], x);
    let m = x.len();
    DMatrix::from_fn(m, m, |i, j| h[i][j])
}

/// `∂²f/∂aᵢ∂bⱼ` for `f` evaluated on the concatenation `[a; b]`.
pub fn mixed_jacobian(f: &impl ScalarFn, a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let x: Vec<f64> = a.iter().chain(b).copied().collect();
    let h = mixed_at(&NoParams(f), &[], &x, a.len());
    DMatrix::from_fn(a.len(), b.len(), |i, j| h[i][j])
}

fn lift2<T: Real>(v: T) -> Dual<Dual<T>> {
    Dual::lift(Dual::lift(v))
}

/// Seeds `x` for the (outer `i`, inner `j`) second-order sweep.
fn seed_pair<T: Real>(x: &[T], i: usize, j: usize) -> Vec<Dual<Dual<T>>> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| {
            let inner = if k == j { Dual::seed(v) } else { Dual::lift(v) };
            let outer_eps = if k == i {
                Dual::lift(T::constant(1.0))
            } else {
                Dual::lift(T::zero())
            };
            Dual::new(inner, outer_eps)
        })
        .collect()
}

/// Forward-mode gradient with respect to `x`, `x.len()` sweeps.
pub fn gradient_at<T: Real>(f: &impl ParamFn, params: &[T], x: &[T]) -> Vec<T> {
    let p: Vec<Dual<T>> = params.iter().map(|&v| Dual::lift(v)).collect();
    (0..x.len())
        .map(|i| {
            let xi: Vec<Dual<T>> = x
                .iter()
                .enumerate()
                .map(|(k, &v)| if k == i { Dual::seed(v) } else { Dual::lift(v) })
                .collect();
            f.eval(&p, &xi).eps
        })
        .collect()
}

/// Hessian with respect to `x`; entry `(i, j)` is computed once for `i ≤ j`
/// and mirrored.
pub fn hessian_at<T: Real>(f: &impl ParamFn, params: &[T], x: &[T]) -> Vec<Vec<T>> {
    let m = x.len();
    let p: Vec<Dual<Dual<T>>> = params.iter().map(|&v| lift2(v)).collect();
    let mut h = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let y = f.eval(&p, &seed_pair(x, i, j));
            h[i][j] = y.eps.eps;
            h[j][i] = y.eps.eps;
        }
    }
    h
}

/// Mixed block `∂²f/∂xᵢ∂xⱼ` for `i < split ≤ j`, returned as
/// `split × (m − split)`.
pub fn mixed_at<T: Real>(f: &impl ParamFn, params: &[T], x: &[T], split: usize) -> Vec<Vec<T>> {
    let m = x.len();
    assert!(split <= m);
    let p: Vec<Dual<Dual<T>>> = params.iter().map(|&v| lift2(v)).collect();
    (0..split)
        .map(|i| {
            (split..m)
                .map(|j| f.eval(&p, &seed_pair(x, i, j)).eps.eps)
                .collect()
        })
        .collect()
}

/// Value and Jacobian (`outputs × inputs`) of a vector function, forward mode.
pub fn jacobian_at<T: Real>(f: &impl VectorFn, x: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let value = f.eval(x);
    let mut jac = vec![vec![T::zero(); x.len()]; value.len()];
    for k in 0..x.len() {
        let xk: Vec<Dual<T>> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == k { Dual::seed(v) } else { Dual::lift(v) })
            .collect();
        for (row, out) in jac.iter_mut().zip(f.eval(&xk)) {
            row[k] = out.eps;
        }
    }
    (value, jac)
}
