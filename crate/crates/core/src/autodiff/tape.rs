//! Reverse-mode differentiation on a Wengert list.
//!
//! Every operation on a [`Var`] that depends on a recorded input pushes one
//! node holding the local partials with respect to (at most) two parents.
//! Constants are never recorded; they carry no tape reference at all.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::{sigmoid_f64, softplus_f64};
use super::Real;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    a: u32,
    da: f64,
    b: u32,
    db: f64,
}

/// Recording context for one reverse sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// A scalar that records the operations applied to it on a [`Tape`].
#[derive(Clone, Copy, Debug)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: u32,
    val: f64,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops every recorded node. Requires that no `Var` of this tape is alive.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    /// Registers an independent input.
    pub fn var(&self, value: f64) -> Var<'_> {
        let idx = self.push(Node {
            a: NONE,
            da: 0.0,
            b: NONE,
            db: 0.0,
        });
        Var {
            tape: Some(self),
            idx,
            val: value,
        }
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    fn push(&self, node: Node) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len();
        assert!(idx < NONE as usize, "tape overflow");
        nodes.push(node);
        idx as u32
    }

    /// Adjoints of every recorded node for the scalar `output`.
    pub fn adjoints(&self, output: Var<'_>) -> Adjoints {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        if let Some(t) = output.tape {
            assert!(std::ptr::eq(t, self), "output belongs to another tape");
            adj[output.idx as usize] = 1.0;
            for i in (0..=output.idx as usize).rev() {
                let g = adj[i];
                if g == 0.0 {
                    continue;
                }
                let n = nodes[i];
                if n.a != NONE {
                    adj[n.a as usize] += g * n.da;
                }
                if n.b != NONE {
                    adj[n.b as usize] += g * n.db;
                }
            }
        }
        Adjoints { adj }
    }

    /// Gradient of `output` with respect to `inputs`.
    pub fn gradient(&self, output: Var<'_>, inputs: &[Var<'_>]) -> Vec<f64> {
        let adj = self.adjoints(output);
        inputs.iter().map(|v| adj.wrt(*v)).collect()
    }
}

/// Result of a reverse sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        match v.tape {
            Some(_) => self.adj.get(v.idx as usize).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }
}

impl<'t> Var<'t> {
    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }

    #[inline]
    fn unary(self, val: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant(val),
            Some(t) => Var {
                tape: Some(t),
                idx: t.push(Node {
                    a: self.idx,
                    da: d,
                    b: NONE,
                    db: 0.0,
                }),
                val,
            },
        }
    }

    #[inline]
    fn binary(self, o: Self, val: f64, da: f64, db: f64) -> Self {
        let (tape, a, b) = match (self.tape, o.tape) {
            (None, None) => return Var::constant(val),
            (Some(t), None) => (t, self.idx, NONE),
            (None, Some(t)) => (t, NONE, o.idx),
            (Some(t), Some(u)) => {
                debug_assert!(std::ptr::eq(t, u), "mixing tapes");
                (t, self.idx, o.idx)
            }
        };
        Var {
            tape: Some(tape),
            idx: tape.push(Node { a, da, b, db }),
            val,
        }
    }
}

impl Add for Var<'_> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        self.binary(o, self.val + o.val, 1.0, 1.0)
    }
}

impl Sub for Var<'_> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self.binary(o, self.val - o.val, 1.0, -1.0)
    }
}

impl Mul for Var<'_> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        self.binary(o, self.val * o.val, o.val, self.val)
    }
}

impl Div for Var<'_> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.val / o.val;
        self.binary(o, q, 1.0 / o.val, -q / o.val)
    }
}

impl Neg for Var<'_> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl Add<f64> for Var<'_> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        self.unary(self.val + o, 1.0)
    }
}

impl Sub<f64> for Var<'_> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        self.unary(self.val - o, 1.0)
    }
}

impl Mul<f64> for Var<'_> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        self.unary(self.val * o, o)
    }
}

impl Div<f64> for Var<'_> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self.unary(self.val / o, 1.0 / o)
    }
}

impl Real for Var<'_> {
    fn constant(v: f64) -> Self {
        Var {
            tape: None,
            idx: NONE,
            val: v,
        }
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn tanh(self) -> Self {
        let t = self.val.tanh();
        self.unary(t, 1.0 - t * t)
    }

    fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }

    fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }

    fn ln(self) -> Self {
        self.unary(self.val.ln(), 1.0 / self.val)
    }

    fn softplus(self) -> Self {
        self.unary(softplus_f64(self.val), sigmoid_f64(self.val))
    }

    fn sigmoid(self) -> Self {
        let s = sigmoid_f64(self.val);
        self.unary(s, s * (1.0 - s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        let y = tape.var(-2.0);
        let f = x * y + x.sin();
        let g = tape.gradient(f, &[x, y]);
        assert_eq!(g[0], -2.0 + 3.0f64.cos());
        assert_eq!(g[1], 3.0);
    }

    #[test]
    fn constants_are_not_recorded() {
        let tape = Tape::new();
        let c = Var::constant(2.0);
        let d = (c * c).exp();
        assert!(d.is_constant());
        assert!(tape.is_empty());
        assert_eq!(d.value(), 4.0f64.exp());
    }

    #[test]
    fn unused_input_has_zero_gradient() {
        let tape = Tape::new();
        let x = tape.var(1.0);
        let y = tape.var(5.0);
        let f = x.tanh();
        assert_eq!(tape.gradient(f, &[x, y])[1], 0.0);
    }
}
