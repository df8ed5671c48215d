//! Inverse-dynamics identification with Newtonian and Lagrangian networks.

pub mod autodiff;
pub mod data;
pub mod dynamics;
mod error;
pub mod eval;
pub mod experiment;
pub mod nets;
pub mod training;

pub use error::{Error, Result};
