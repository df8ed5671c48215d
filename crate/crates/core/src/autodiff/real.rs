use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type that differentiable functions are written against.
///
/// Implemented by `f64`, [`Dual`](super::Dual) (forward mode, nestable for
/// higher orders) and [`Var`](super::Var) (reverse mode). A function generic
/// over `Real` can only use the primitives listed here, so anything outside
/// the supported set is rejected when the function is compiled.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(v: f64) -> Self;

    /// Primal value.
    fn value(&self) -> f64;

    fn tanh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// `ln(1 + e^x)`
    fn softplus(self) -> Self;
    /// `1 / (1 + e^-x)`, the derivative of softplus.
    fn sigmoid(self) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

pub(crate) fn softplus_f64(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Real for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn softplus(self) -> Self {
        softplus_f64(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid_f64(self)
    }
}

/// `Σ aᵢ bᵢ`
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Matrix-vector product with a row-major `rows × x.len()` matrix.
pub fn matvec<T: Real>(m: &[T], rows: usize, x: &[T]) -> Vec<T> {
    let cols = x.len();
    assert_eq!(m.len(), rows * cols, "matvec shape");
    (0..rows)
        .map(|r| dot(&m[r * cols..(r + 1) * cols], x))
        .collect()
}
