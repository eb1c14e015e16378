//! Standard refinement experiments.

use super::experiment::{regularity_experiment, ExperimentRecord, Prediction};
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::{Block, Geometry, GridFunction};
use crate::solver::{advection_fractional, toy_model, Diffusion, EquationSpec, SolverOptions, Term};
use std::f64::consts::PI;

/// An equation family indexed by lattice size, with the direction probed and
/// the regularity expected there.
pub struct RegularityCase {
    pub name: &'static str,
    pub direction: Block,
    pub prediction: Prediction,
    pub n: usize,
    pub build: Box<dyn Fn(usize) -> Result<EquationSpec> + Send + Sync>,
}

fn rough(t: f64) -> f64 {
    (PI * t).sin().abs().sqrt()
}

/// Toy model with a forcing that is smooth in x1 and only 1/2-Hölder in x2.
pub fn toy_case(beta: f64, n: usize) -> Result<RegularityCase> {
    Ok(RegularityCase {
        name: "toy-model",
        direction: Block::One,
        prediction: Prediction::partial(beta, 0.0)?,
        n,
        build: Box::new(move |n| {
            let g = Geometry::new(1, 1, n)?;
            let f = GridFunction::from_fn(g, |x| {
                (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos() + 0.5 * (2.0 * PI * x[0]).sin() * rough(x[1])
            });
            toy_model(g, beta, f)
        }),
    })
}

/// (−Δ)^{β/2}u + b·Du + u = f with b₁ = |sin πx₁|^{b_exponent}/2, probed in x1
/// against the exponent β.
pub fn advection_case(beta: f64, b_exponent: f64, n: usize) -> Result<RegularityCase> {
    Ok(RegularityCase {
        name: "advection-fractional",
        direction: Block::One,
        prediction: Prediction::Holder { alpha_max: beta },
        n,
        build: Box::new(move |n| {
            let g = Geometry::new(1, 1, n)?;
            let b1 = ScalarField::func(move |x| 0.5 * (PI * x[0]).sin().abs().powf(b_exponent));
            let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() + 0.5 * (2.0 * PI * x[1]).sin());
            advection_fractional(g, beta, vec![b1, 0.0.into()], 1.0, f)
        }),
    })
}

/// −Δ_{x1}u + 10u = f with no diffusion at all in x2 and a forcing that is
/// 1/2-Hölder in x2; regularity is probed in the nondegenerate block.
pub fn degenerate_block_case(n: usize) -> Result<RegularityCase> {
    Ok(RegularityCase {
        name: "degenerate-block",
        direction: Block::One,
        prediction: Prediction::Lipschitz,
        n,
        build: Box::new(move |n| {
            let g = Geometry::new(1, 1, n)?;
            let f = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() * (1.0 + rough(x[1])) + rough(x[1]));
            let terms = vec![
                Term::LocalTrace { a: Diffusion::Scalar(1.0.into()), block: Block::One },
                Term::ZerothOrder { c: 10.0 },
                Term::Forcing { f },
            ];
            EquationSpec::new("degenerate-block", g, terms)
        }),
    })
}

impl RegularityCase {
    pub fn run(&self, opts: &SolverOptions) -> Result<ExperimentRecord> {
        regularity_experiment(&*self.build, self.n, self.direction, self.prediction, opts)
    }
}
