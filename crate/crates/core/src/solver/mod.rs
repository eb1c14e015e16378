//! Equation assembly and monotone explicit solvers on the periodic lattice.
//!
//! An equation is a sum of terms F(u) − f; stationary problems are solved by
//! pseudo-time marching u ← u − dt·(F(u) − f), evolution problems by explicit
//! Euler. Control families turn the residual into a pointwise sup-inf.

mod catalogue;
mod march;
mod residual;
mod spec;

pub use catalogue::{
    advection_fractional, fractional_heat, isaacs_diffusion, mixed_first_order, model_equation, toy_model, ModelEquation,
    MixedFirstOrder, CATALOGUE,
};
pub use march::{cfl_limit, solve_isaacs, solve_parabolic, solve_stationary, IsaacsSolution, Solution, SolverOptions, Trajectory};
pub use residual::{residual, CompiledSpec, Discretization, ResidualField, GRADIENT_FLOOR};
pub use spec::{gradient_cutoff, Controls, Diffusion, EllipticityProfile, EquationSpec, Term, MAX_CONTROLS};
