//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature failure in {context}: estimated error {estimated_error:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure {
        context: String,
        estimated_error: f64,
        tolerance: f64,
    },
    #[error("divergent convolution: eps*lambda = {product} >= 1")]
    DivergentConvolution { product: f64 },
    #[error("degenerate maximum: {0}")]
    Degenerate(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("no convergence after {steps} steps (last residual {last_residual:e})")]
    NonConvergence {
        steps: usize,
        last_residual: f64,
        history: Vec<(usize, f64, f64)>,
    },
    #[error("instability at t = {time}: sup norm {norm:e} exceeds bound {bound:e}")]
    Instability { time: f64, norm: f64, bound: f64 },
    #[error("cannot fit exponent: {0}")]
    UnfitTable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
