//! Refinement experiments comparing measured moduli with predicted regularity.

use super::modulus::{fit_exponent, modulus, ExponentFit, ModulusReport};
use crate::error::{Error, Result};
use crate::grid::{Block, GridFunction};
use crate::solver::{solve_stationary, EquationSpec, SolverOptions};

/// Number of smallest separations entering the Lipschitz ratio.
pub const RATIO_SEPARATIONS: usize = 4;
/// Allowed relative drift of the Lipschitz ratio under n → 2n.
pub const RATIO_TOLERANCE: f64 = 0.2;
/// Allowed shortfall of the fitted exponent below the predicted one.
pub const EXPONENT_SLACK: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Lipschitz,
    Holder { alpha_max: f64 },
    /// The critical case k = β = 1: measured, never judged.
    Uncharacterized,
}

impl Prediction {
    /// Regularity in the block carrying the nonlocal operator of order β and
    /// a gradient term of growth k.
    pub fn partial(beta: f64, k: f64) -> Result<Prediction> {
        if !(beta > 0.0 && beta < 2.0) || !(k >= 0.0) {
            return Err(Error::InvalidInput(format!("beta = {beta}, k = {k} out of range")));
        }
        if beta > 1.0 {
            if k > beta {
                return Err(Error::InvalidInput(format!("k = {k} exceeds beta = {beta}")));
            }
            return Ok(Prediction::Lipschitz);
        }
        if beta == 1.0 && k == 1.0 {
            return Ok(Prediction::Uncharacterized);
        }
        if k >= beta {
            return Err(Error::InvalidInput(format!("k = {k} must be below beta = {beta} <= 1")));
        }
        Ok(Prediction::Holder { alpha_max: ((beta - k) / (1.0 - k)).min(1.0) })
    }

    pub fn label(&self) -> String {
        match self {
            Prediction::Lipschitz => "lipschitz".into(),
            Prediction::Holder { alpha_max } => format!("holder({alpha_max})"),
            Prediction::Uncharacterized => "uncharacterized".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Uncharacterized regime: no pass/fail is issued.
    Uncharacterized,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Uncharacterized => "uncharacterized regime",
        }
    }
}

/// Evidence of one experiment at the coarse (n) and fine (2n) lattices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub name: String,
    pub direction: Block,
    pub prediction: Prediction,
    pub n: [usize; 2],
    pub fields: [GridFunction; 2],
    pub reports: [ModulusReport; 2],
    pub lipschitz_ratio: [f64; 2],
    /// Fit on the fine lattice over its default window; None when ω vanishes.
    pub fit: Option<ExponentFit>,
    pub solver_steps: [usize; 2],
    pub verdict: Verdict,
}

impl ExperimentRecord {
    /// |r(2n)/r(n) − 1|, 0 when both ratios vanish.
    pub fn ratio_drift(&self) -> f64 {
        let [a, b] = self.lipschitz_ratio;
        if a == 0.0 && b == 0.0 {
            0.0
        } else {
            (b / a - 1.0).abs()
        }
    }
}

/// Solves the equation built at n and 2n from zero initial data, measures
/// moduli along `direction` and judges them against the prediction:
/// Lipschitz needs the ratio max_{m≤4} ω(mh)/(mh) stable within 20%, Hölder
/// needs the fine-lattice fitted exponent within 0.15 of alpha_max.
pub fn regularity_experiment(
    build: &dyn Fn(usize) -> Result<EquationSpec>,
    n: usize,
    direction: Block,
    prediction: Prediction,
    opts: &SolverOptions,
) -> Result<ExperimentRecord> {
    let mut fields = Vec::with_capacity(2);
    let mut reports = Vec::with_capacity(2);
    let mut steps = [0; 2];
    let mut name = String::new();
    for (i, m) in [n, 2 * n].into_iter().enumerate() {
        let spec = build(m)?;
        name = spec.name.clone();
        let sol = solve_stationary(&spec, &GridFunction::zeros(spec.geometry), opts)?;
        reports.push(modulus(&sol.u, direction)?);
        fields.push(sol.u);
        steps[i] = sol.steps;
    }
    let ratio = [reports[0].lipschitz_ratio(RATIO_SEPARATIONS), reports[1].lipschitz_ratio(RATIO_SEPARATIONS)];
    let (t_min, t_max) = reports[1].default_window();
    let fit = match fit_exponent(&reports[1], t_min, t_max) {
        Ok(f) => Some(f),
        Err(Error::UnfitTable(_)) => None,
        Err(e) => return Err(e),
    };
    reports[1].fit = fit.clone();
    let fields: [GridFunction; 2] = fields.try_into().expect("two lattices");
    let reports: [ModulusReport; 2] = reports.try_into().expect("two lattices");
    let mut record = ExperimentRecord {
        name,
        direction,
        prediction,
        n: [n, 2 * n],
        fields,
        reports,
        lipschitz_ratio: ratio,
        fit,
        solver_steps: steps,
        verdict: Verdict::Uncharacterized,
    };
    record.verdict = match prediction {
        Prediction::Uncharacterized => Verdict::Uncharacterized,
        Prediction::Lipschitz => pass(record.ratio_drift() <= RATIO_TOLERANCE),
        Prediction::Holder { alpha_max } => {
            pass(record.fit.as_ref().map_or(true, |f| f.alpha >= alpha_max - EXPONENT_SLACK))
        }
    };
    Ok(record)
}

fn pass(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}
