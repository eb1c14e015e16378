//! Numerical toolkit for mixed integro-differential equations: Lévy operators,
//! matrix calculus, a priori estimates, monotone solvers and regularity probes.

pub mod error;
pub mod estimates;
pub mod expr;
pub mod field;
pub mod grid;
pub mod levy;
pub mod matrixcalc;
pub mod operators;
pub mod quadrature;
pub mod regularity;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
