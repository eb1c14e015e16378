//! Regularity probes: moduli of continuity, fitted Hölder exponents,
//! seminorm certification by the doubling maximum, and refinement
//! experiments against predicted regularity.

mod cases;
mod certify;
mod experiment;
mod modulus;

pub use cases::{advection_case, degenerate_block_case, toy_case, RegularityCase};
pub use certify::{brute_force_seminorm, certify, certify_holder, Certificate};
pub use experiment::{
    regularity_experiment, ExperimentRecord, Prediction, Verdict, EXPONENT_SLACK, RATIO_SEPARATIONS, RATIO_TOLERANCE,
};
pub use modulus::{fit_exponent, modulus, ExponentFit, ModulusReport, PAIR_BUDGET};
