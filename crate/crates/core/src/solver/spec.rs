//! Sum-of-terms equation descriptions.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Block, Geometry, GridFunction};
use crate::levy::{JumpFunction, LevyKernel};

/// Largest admissible size of a control family.
pub const MAX_CONTROLS: usize = 16;

/// Diffusion coefficient of a local trace term.
#[derive(Debug, Clone)]
pub enum Diffusion {
    /// a(x) times the identity of the block.
    Scalar(ScalarField),
    /// Symmetric block-sized matrix field A(x).
    Matrix(Vec<Vec<ScalarField>>),
}

#[derive(Debug, Clone)]
pub enum Term {
    /// −tr(A(x) D²u) over a block.
    LocalTrace { a: Diffusion, block: Block },
    /// −sign·c(x)·I[x,u] with I taken over a block; a jump selects the
    /// Lévy–Itô form.
    Nonlocal { kernel: LevyKernel, jump: Option<JumpFunction>, coefficient: ScalarField, block: Block, sign: f64 },
    /// b(x)·min(|D_block u|, cutoff)^k.
    GradientPower { b: ScalarField, exponent: f64, block: Block, cutoff: Option<f64> },
    /// b(x)·Du.
    Drift { b: Vec<ScalarField> },
    /// c·u.
    ZerothOrder { c: f64 },
    /// −f(x).
    Forcing { f: GridFunction },
}

impl Term {
    pub fn label(&self) -> &'static str {
        match self {
            Term::LocalTrace { .. } => "local-trace",
            Term::Nonlocal { .. } => "nonlocal",
            Term::GradientPower { .. } => "gradient-power",
            Term::Drift { .. } => "drift",
            Term::ZerothOrder { .. } => "zeroth-order",
            Term::Forcing { .. } => "forcing",
        }
    }
}

/// Growth-condition metadata attached to an equation.
#[derive(Debug, Clone)]
pub struct EllipticityProfile {
    pub lambda1: ScalarField,
    pub lambda2: ScalarField,
    pub lambda0: f64,
    pub k: f64,
    pub tau: f64,
    pub theta: f64,
    pub theta_tilde: f64,
    pub c1: f64,
    pub c2: f64,
    pub gamma_tilde: f64,
}

impl EllipticityProfile {
    /// Profile with k = 0, τ = θ = θ̃ = 1 and C1 = C2 = 0.
    pub fn new(lambda1: ScalarField, lambda2: ScalarField, lambda0: f64, gamma_tilde: f64) -> EllipticityProfile {
        EllipticityProfile {
            lambda1,
            lambda2,
            lambda0,
            k: 0.0,
            tau: 1.0,
            theta: 1.0,
            theta_tilde: 1.0,
            c1: 0.0,
            c2: 0.0,
            gamma_tilde,
        }
    }

    /// Checks parameter ranges and Λ1 + Λ2 ≥ Λ0, Λi ≥ 0 at the given points.
    pub fn check(&self, points: &[Vec<f64>]) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !(self.lambda0 > 0.0) || self.k < 0.0 || self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::InvalidInput("profile needs lambda0 > 0 and k, C1, C2 >= 0".into()));
        }
        if !(unit(self.tau) && unit(self.theta) && unit(self.theta_tilde)) {
            return Err(Error::InvalidInput("profile needs tau, theta, theta_tilde in (0, 1]".into()));
        }
        for x in points {
            let (l1, l2) = (self.lambda1.eval(x), self.lambda2.eval(x));
            if l1 < 0.0 || l2 < 0.0 || l1 + l2 < self.lambda0 {
                return Err(Error::InvalidInput(format!(
                    "Lambda1 + Lambda2 = {} < Lambda0 = {} at x = {x:?}",
                    l1 + l2,
                    self.lambda0
                )));
            }
        }
        Ok(())
    }
}

/// Finite families of term-set variants; variant (γ, δ) adds Γ[γ] and Δ[δ]
/// to the base terms and the residual is sup_γ inf_δ of the variants.
#[derive(Debug, Clone)]
pub struct Controls {
    pub gamma: Vec<Vec<Term>>,
    pub delta: Vec<Vec<Term>>,
}

#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub name: String,
    pub geometry: Geometry,
    pub terms: Vec<Term>,
    pub controls: Option<Controls>,
    pub profile: Option<EllipticityProfile>,
    /// False when the growth conditions of the terms were not verified.
    pub profile_checked: bool,
}

/// Coarse sample of the torus used for coefficient checks.
pub(crate) fn sample_points(g: &Geometry) -> Vec<Vec<f64>> {
    let m = 8usize;
    let total = m.pow(g.d() as u32);
    (0..total)
        .map(|mut k| {
            (0..g.d())
                .map(|_| {
                    let i = k % m;
                    k /= m;
                    (i as f64 + 0.5) / m as f64
                })
                .collect()
        })
        .collect()
}

fn check_term(g: &Geometry, t: &Term) -> Result<()> {
    let block_dim = |b: Block| {
        let k = g.block_dim(b);
        if k == 0 {
            Err(Error::GeometryMismatch(format!("block {} is empty", b.label())))
        } else {
            Ok(k)
        }
    };
    match t {
        Term::LocalTrace { a, block } => {
            let k = block_dim(*block)?;
            if let Diffusion::Matrix(m) = a {
                if m.len() != k || m.iter().any(|r| r.len() != k) {
                    return Err(Error::GeometryMismatch(format!("diffusion matrix must be {k}x{k}")));
                }
            }
        }
        Term::Nonlocal { kernel, jump, block, sign, .. } => {
            let k = block_dim(*block)?;
            if kernel.dim != k {
                return Err(Error::GeometryMismatch(format!("kernel dimension {} on block of dimension {k}", kernel.dim)));
            }
            if jump.as_ref().is_some_and(|j| j.dim != k) {
                return Err(Error::GeometryMismatch("jump dimension differs from the block".into()));
            }
            if *sign != 1.0 && *sign != -1.0 {
                return Err(Error::InvalidInput(format!("nonlocal sign {sign} must be +1 or -1")));
            }
        }
        Term::GradientPower { exponent, block, cutoff, .. } => {
            block_dim(*block)?;
            if !(*exponent >= 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidInput(format!("gradient exponent {exponent} must be nonnegative")));
            }
            if cutoff.is_some_and(|r| !(r >= 0.0)) {
                return Err(Error::InvalidInput("gradient cutoff must be nonnegative".into()));
            }
        }
        Term::Drift { b } => {
            if b.len() != g.d() {
                return Err(Error::GeometryMismatch(format!("drift has {} components for dimension {}", b.len(), g.d())));
            }
        }
        Term::ZerothOrder { c } => {
            if !c.is_finite() {
                return Err(Error::InvalidInput("zeroth-order coefficient must be finite".into()));
            }
        }
        Term::Forcing { f } => {
            if f.geometry != *g {
                return Err(Error::GeometryMismatch("forcing lives on a different lattice".into()));
            }
        }
    }
    Ok(())
}

fn is_dissipative(t: &Term, points: &[Vec<f64>]) -> bool {
    match t {
        Term::LocalTrace { a: Diffusion::Scalar(a), .. } => points.iter().any(|x| a.eval(x) > 0.0),
        Term::LocalTrace { a: Diffusion::Matrix(m), .. } => {
            points.iter().any(|x| (0..m.len()).any(|i| m[i][i].eval(x) > 0.0))
        }
        Term::Nonlocal { coefficient, sign, .. } => points.iter().any(|x| sign * coefficient.eval(x) > 0.0),
        Term::ZerothOrder { c } => *c > 0.0,
        _ => false,
    }
}

impl EquationSpec {
    pub fn new(name: impl Into<String>, geometry: Geometry, terms: Vec<Term>) -> Result<EquationSpec> {
        let spec = EquationSpec {
            name: name.into(),
            geometry,
            terms,
            controls: None,
            profile: None,
            profile_checked: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Base terms with control families; only the variants need to be
    /// dissipative.
    pub fn controlled(name: impl Into<String>, geometry: Geometry, terms: Vec<Term>, controls: Controls) -> Result<EquationSpec> {
        let spec = EquationSpec {
            name: name.into(),
            geometry,
            terms,
            controls: Some(controls),
            profile: None,
            profile_checked: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_controls(mut self, controls: Controls) -> Result<EquationSpec> {
        self.controls = Some(controls);
        self.validate()?;
        Ok(self)
    }

    /// Attaches a profile; `checked` records whether the terms are known to
    /// satisfy the growth conditions it describes.
    pub fn with_profile(mut self, profile: EllipticityProfile, checked: bool) -> Result<EquationSpec> {
        profile.check(&sample_points(&self.geometry))?;
        self.profile = Some(profile);
        self.profile_checked = checked;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for t in self.all_terms() {
            check_term(g, t)?;
        }
        if let Some(c) = &self.controls {
            if c.gamma.is_empty() || c.delta.is_empty() || c.gamma.len() > MAX_CONTROLS || c.delta.len() > MAX_CONTROLS {
                return Err(Error::InvalidInput(format!(
                    "control families must have 1 to {MAX_CONTROLS} variants (got {} and {})",
                    c.gamma.len(),
                    c.delta.len()
                )));
            }
        }
        let points = sample_points(g);
        for (i, j) in self.variant_indices() {
            if !self.variant_terms(i, j).any(|t| is_dissipative(t, &points)) {
                return Err(Error::InvalidInput(format!(
                    "equation '{}' (variant {i},{j}) has no dissipative term",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Every term, base and controlled.
    pub fn all_terms(&self) -> impl Iterator<Item = &Term> {
        let ctrl = self.controls.iter().flat_map(|c| c.gamma.iter().chain(&c.delta)).flatten();
        self.terms.iter().chain(ctrl)
    }

    pub fn variant_counts(&self) -> (usize, usize) {
        self.controls.as_ref().map_or((1, 1), |c| (c.gamma.len(), c.delta.len()))
    }

    pub fn variant_indices(&self) -> impl Iterator<Item = (usize, usize)> {
        let (ng, nd) = self.variant_counts();
        (0..ng).flat_map(move |i| (0..nd).map(move |j| (i, j)))
    }

    /// Base terms followed by Γ[γ] and Δ[δ].
    pub fn variant_terms(&self, gamma: usize, delta: usize) -> impl Iterator<Item = &Term> {
        let extra = self.controls.iter().flat_map(move |c| c.gamma[gamma].iter().chain(&c.delta[delta]));
        self.terms.iter().chain(extra)
    }

    /// Total zeroth-order coefficient of a variant.
    pub fn zeroth_order(&self, gamma: usize, delta: usize) -> f64 {
        self.variant_terms(gamma, delta)
            .map(|t| if let Term::ZerothOrder { c } = t { *c } else { 0.0 })
            .sum()
    }

    pub fn has_gradient_terms(&self) -> bool {
        self.all_terms().any(|t| matches!(t, Term::GradientPower { .. } | Term::Drift { .. }))
    }

    /// Largest value of |F(0)|: forcing plus gradient terms of order zero,
    /// maximized over variants.
    pub fn source_bound(&self) -> f64 {
        let points: Vec<Vec<f64>> = (0..self.geometry.len()).map(|i| self.geometry.coords(i)).collect();
        self.variant_indices()
            .map(|(i, j)| {
                self.variant_terms(i, j)
                    .map(|t| match t {
                        Term::Forcing { f } => f.sup_norm(),
                        Term::GradientPower { b, exponent, cutoff, .. } if *exponent == 0.0 && *cutoff != Some(0.0) => {
                            points.iter().map(|x| b.eval(x).abs()).fold(0.0, f64::max)
                        }
                        _ => 0.0,
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// The sup-norm bound M/c for solutions when every variant has a
    /// positive zeroth-order coefficient; c is the smallest of them.
    pub fn comparison_bound(&self) -> Option<f64> {
        let c = self.variant_indices().map(|(i, j)| self.zeroth_order(i, j)).fold(f64::INFINITY, f64::min);
        (c > 0.0).then(|| self.source_bound() / c)
    }
}

/// Clamps the magnitude argument of every gradient-power term at R; R = ∞
/// leaves the equation unchanged.
pub fn gradient_cutoff(spec: &EquationSpec, r: f64) -> Result<EquationSpec> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("cutoff R = {r} must be nonnegative")));
    }
    let mut out = spec.clone();
    if r.is_infinite() {
        return Ok(out);
    }
    let clamp = |terms: &mut Vec<Term>| {
        for t in terms.iter_mut() {
            if let Term::GradientPower { cutoff, .. } = t {
                *cutoff = Some(cutoff.map_or(r, |c| c.min(r)));
            }
        }
    };
    clamp(&mut out.terms);
    if let Some(c) = &mut out.controls {
        c.gamma.iter_mut().chain(c.delta.iter_mut()).for_each(clamp);
    }
    Ok(out)
}
