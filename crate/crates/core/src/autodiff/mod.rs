//! Exact derivatives for the physics networks.
//!
//! Two routes share one contract. The general route writes a function once
//! against [`Real`] and evaluates it at nested [`Dual`]s and [`Var`]s, which
//! covers any composition of the supported primitives. The batched route in
//! [`jet`] propagates truncated Taylor jets through dense networks with GEMM
//! and is what training uses; tests hold the two against each other.

mod derivatives;
mod dual;
pub mod jet;
pub(crate) mod real;
mod tape;

pub use derivatives::{
    grad, gradient_at, hessian, hessian_at, jacobian_at, mixed_at, mixed_jacobian, param_gradient,
    ParamFn, ScalarFn, VectorFn,
};
pub use dual::Dual;
pub use real::{dot, matvec, Real};
pub use tape::{Adjoints, Tape, Var};
