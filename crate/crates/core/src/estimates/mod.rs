//! Quantitative estimates behind the regularity argument: doubling of
//! variables, concave and quadratic estimates, the Hölder and Lipschitz
//! bounds and the directional sign analysis.

mod bounds;
mod concave;
mod doubling;
mod phi;
mod sign;
pub mod trials;

pub use bounds::{holder_bound, lipschitz_bound, quadratic_bound, quadratic_check, BoundReport, MeasureConstants, QuadraticCheck};
pub use concave::{
    concave_estimate_sides, levy_ito_concave_sides, m1_sup, middle_cone_inclusion, s_grid, ConeInclusion, EstimateSides,
    S_GRID_POINTS,
};
pub use doubling::{locate_max, phi_seminorm, locate_max_quadratic, partial_locate_max, DoublingGeometry, MaxPoint};
pub use phi::{PhiFamily, TestFunctionPhi};
pub use sign::{directional_sign_analysis, SignReport};
