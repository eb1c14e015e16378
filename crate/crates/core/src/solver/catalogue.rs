//! Equations of the standard catalogue.

use super::spec::{Controls, Diffusion, EllipticityProfile, EquationSpec, Term};
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::{Block, Geometry, GridFunction};
use crate::levy::LevyKernel;

/// Names and one-line descriptions of the catalogue entries.
pub const CATALOGUE: &[(&str, &str)] = &[
    ("toy-model", "-Lap_{x1} u + (-Lap_{x2})^{beta/2} u = f"),
    ("model-equation", "-a Lap u - c(x) I[x,u] + b(x)|Du|^k + |Du|^r + c0 u = f"),
    ("advection-fractional", "(-Lap)^{beta/2} u + b(x).Du + c u = f"),
    ("mixed-first-order", "-a1 Lap_{x1} u - a2 I_{x2} - I + b1|D_{x1}u|^k1 + b2|D_{x2}u|^k2 + |Du|^m + c u = f"),
    ("isaacs-diffusion", "sup over a in A of (-a Lap u) + c u = f"),
    ("fractional-heat", "u_t + (-Lap)^{beta/2} u = f"),
];

fn fractional(block_dim: usize, beta: f64, block: Block, coefficient: ScalarField) -> Result<Term> {
    Ok(Term::Nonlocal { kernel: LevyKernel::fractional(block_dim, beta)?, jump: None, coefficient, block, sign: 1.0 })
}

fn laplacian(a: ScalarField, block: Block) -> Term {
    Term::LocalTrace { a: Diffusion::Scalar(a), block }
}

/// −Δ_{x1}u + (−Δ_{x2})^{β/2}u = f on a split lattice.
pub fn toy_model(geometry: Geometry, beta: f64, f: GridFunction) -> Result<EquationSpec> {
    let terms = vec![
        laplacian(1.0.into(), Block::One),
        fractional(geometry.d2, beta, Block::Two, 1.0.into())?,
        Term::Forcing { f },
    ];
    let profile = EllipticityProfile::new(1.0.into(), 1.0.into(), 1.0, 0.0);
    EquationSpec::new("toy-model", geometry, terms)?.with_profile(profile, true)
}

/// Coefficients of the model equation.
#[derive(Debug, Clone)]
pub struct ModelEquation {
    pub a: ScalarField,
    pub c: ScalarField,
    pub kernel: LevyKernel,
    pub b: ScalarField,
    pub k: f64,
    pub r: f64,
    pub c0: f64,
}

/// −a(x)Δu − c(x)I[x,u] + b(x)|Du|^k + |Du|^r + c0·u = f.
pub fn model_equation(geometry: Geometry, p: &ModelEquation, f: GridFunction) -> Result<EquationSpec> {
    let terms = vec![
        laplacian(p.a.clone(), Block::Full),
        Term::Nonlocal { kernel: p.kernel.clone(), jump: None, coefficient: p.c.clone(), block: Block::Full, sign: 1.0 },
        Term::GradientPower { b: p.b.clone(), exponent: p.k, block: Block::Full, cutoff: None },
        Term::GradientPower { b: 1.0.into(), exponent: p.r, block: Block::Full, cutoff: None },
        Term::ZerothOrder { c: p.c0 },
        Term::Forcing { f },
    ];
    EquationSpec::new("model-equation", geometry, terms)
}

/// (−Δ)^{β/2}u + b(x)·Du + c·u = f; the zeroth-order term is omitted when
/// c = 0.
pub fn advection_fractional(geometry: Geometry, beta: f64, b: Vec<ScalarField>, c: f64, f: GridFunction) -> Result<EquationSpec> {
    let mut terms = vec![fractional(geometry.d(), beta, Block::Full, 1.0.into())?, Term::Drift { b }];
    if c != 0.0 {
        terms.push(Term::ZerothOrder { c });
    }
    terms.push(Term::Forcing { f });
    let profile = EllipticityProfile::new(0.0.into(), 1.0.into(), 1.0, c);
    EquationSpec::new("advection-fractional", geometry, terms)?.with_profile(profile, true)
}

/// Coefficients of the mixed equation with first-order terms.
#[derive(Debug, Clone)]
pub struct MixedFirstOrder {
    pub a1: ScalarField,
    pub a2: ScalarField,
    /// Exponent of the nonlocal operator acting on x2.
    pub beta2: f64,
    /// Exponent of the full-space nonlocal operator; None drops it.
    pub beta0: Option<f64>,
    pub b1: ScalarField,
    pub k1: f64,
    pub b2: ScalarField,
    pub k2: f64,
    /// Exponent of |Du|; None drops the term.
    pub m: Option<f64>,
    pub c: f64,
}

/// −a1Δ_{x1}u − a2 I_{x2}[x,u] − I[x,u] + b1|D_{x1}u|^{k1} + b2|D_{x2}u|^{k2}
/// + |Du|^m + c·u = f.
pub fn mixed_first_order(geometry: Geometry, p: &MixedFirstOrder, f: GridFunction) -> Result<EquationSpec> {
    let mut terms = vec![laplacian(p.a1.clone(), Block::One), fractional(geometry.d2, p.beta2, Block::Two, p.a2.clone())?];
    if let Some(b0) = p.beta0 {
        terms.push(fractional(geometry.d(), b0, Block::Full, 1.0.into())?);
    }
    terms.push(Term::GradientPower { b: p.b1.clone(), exponent: p.k1, block: Block::One, cutoff: None });
    terms.push(Term::GradientPower { b: p.b2.clone(), exponent: p.k2, block: Block::Two, cutoff: None });
    if let Some(m) = p.m {
        terms.push(Term::GradientPower { b: 1.0.into(), exponent: m, block: Block::Full, cutoff: None });
    }
    terms.push(Term::ZerothOrder { c: p.c });
    terms.push(Term::Forcing { f });
    EquationSpec::new("mixed-first-order", geometry, terms)
}

/// sup over a ∈ `coefficients` of −aΔu, plus c·u = f.
pub fn isaacs_diffusion(geometry: Geometry, coefficients: &[f64], c: f64, f: GridFunction) -> Result<EquationSpec> {
    let gamma = coefficients.iter().map(|&a| vec![laplacian(a.into(), Block::Full)]).collect();
    let terms = vec![Term::ZerothOrder { c }, Term::Forcing { f }];
    EquationSpec::controlled("isaacs-diffusion", geometry, terms, Controls { gamma, delta: vec![vec![]] })
}

/// (−Δ)^{β/2}u = f, the spatial part of the fractional heat equation.
pub fn fractional_heat(geometry: Geometry, beta: f64, f: Option<GridFunction>) -> Result<EquationSpec> {
    let mut terms = vec![fractional(geometry.d(), beta, Block::Full, 1.0.into())?];
    if let Some(f) = f {
        terms.push(Term::Forcing { f });
    }
    EquationSpec::new("fractional-heat", geometry, terms)
}
