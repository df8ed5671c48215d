use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Real;

/// Forward-mode dual number `re + eps·ε` with `ε² = 0`.
///
/// The inner type is itself any [`Real`], so `Dual<Dual<f64>>` carries
/// second derivatives and `Dual<Dual<Var>>` lets reverse mode run over a
/// second-order forward expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    /// A value with zero tangent.
    pub fn lift(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }

    /// A value seeded with unit tangent.
    pub fn seed(re: T) -> Self {
        Dual {
            re,
            eps: T::constant(1.0),
        }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual {
            re: f,
            eps: self.eps * df,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        Dual::new(re, (self.eps - re * o.eps) / o.re)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Dual::new(self.re + o, self.eps)
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Dual::new(self.re - o, self.eps)
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Dual::new(self.re * o, self.eps * o)
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        Dual::new(self.re / o, self.eps / o)
    }
}

impl<T: Real> Real for Dual<T> {
    fn constant(v: f64) -> Self {
        Dual::lift(T::constant(v))
    }

    fn value(&self) -> f64 {
        self.re.value()
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, (t * t - 1.0) * -1.0)
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::constant(1.0) / self.re)
    }

    fn softplus(self) -> Self {
        self.chain(self.re.softplus(), self.re.sigmoid())
    }

    fn sigmoid(self) -> Self {
        let s = self.re.sigmoid();
        self.chain(s, s * (s * -1.0 + 1.0))
    }
}
