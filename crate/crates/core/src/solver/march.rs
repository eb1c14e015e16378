//! Explicit pseudo-time and time marching.

use super::residual::{CompiledSpec, Discretization};
use super::spec::EquationSpec;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once ‖residual‖∞ ≤ tol.
    pub tol: f64,
    pub max_steps: usize,
    /// dt = cfl / stiffness.
    pub cfl: f64,
    /// Keep every k-th step in the history (the last step is always kept).
    pub record_every: usize,
    pub disc: Discretization,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_steps: 200_000, cfl: 0.5, record_every: 100, disc: Discretization::default() }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_fast_path(mut self, fast: bool) -> Self {
        self.disc.fast_path = fast;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: GridFunction,
    pub steps: usize,
    pub residual: f64,
    /// (step, ‖residual‖∞, dt).
    pub history: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsaacsSolution {
    pub solution: Solution,
    /// Active (γ, δ) at every lattice point of the final iterate.
    pub selection: Vec<(usize, usize)>,
}

fn check_init(spec: &EquationSpec, u: &GridFunction) -> Result<()> {
    if u.geometry != spec.geometry {
        return Err(Error::GeometryMismatch("initial field lives on a different lattice".into()));
    }
    Ok(())
}

fn march(spec: &EquationSpec, init: &GridFunction, opts: &SolverOptions) -> Result<IsaacsSolution> {
    check_init(spec, init)?;
    if !(opts.tol > 0.0) || !(opts.cfl > 0.0) {
        return Err(Error::InvalidInput("tol and cfl must be positive".into()));
    }
    let c = CompiledSpec::new(spec, &opts.disc)?;
    let every = opts.record_every.max(1);
    let mut u = init.clone();
    let mut history = Vec::new();
    let fixed = c.has_constant_stiffness().then(|| c.stiffness(&u));
    for step in 0..=opts.max_steps {
        let r = c.residual(&u)?;
        let rn = r.residual.sup_norm();
        let dt = opts.cfl / fixed.unwrap_or_else(|| c.stiffness(&u));
        let done = rn <= opts.tol;
        if step % every == 0 || done || step == opts.max_steps || !rn.is_finite() {
            history.push((step, rn, dt));
        }
        if done {
            let solution = Solution { u, steps: step, residual: rn, history };
            return Ok(IsaacsSolution { solution, selection: r.selection });
        }
        if !rn.is_finite() || !dt.is_finite() || step == opts.max_steps {
            return Err(Error::NonConvergence { steps: step, last_residual: rn, history });
        }
        for (x, ri) in u.values.iter_mut().zip(&r.residual.values) {
            *x -= dt * ri;
        }
    }
    unreachable!()
}

/// Iterates u ← u − dt·residual(u) with dt = cfl/Σ stiffness until the
/// residual drops below the tolerance. The caller is responsible for the
/// iteration being contractive (a positive zeroth-order term, or a forcing
/// orthogonal to the kernel of the operator).
pub fn solve_stationary(spec: &EquationSpec, init: &GridFunction, opts: &SolverOptions) -> Result<Solution> {
    Ok(march(spec, init, opts)?.solution)
}

/// Pseudo-time marching of the sup-inf residual; without controls this is
/// solve_stationary.
pub fn solve_isaacs(spec: &EquationSpec, init: &GridFunction, opts: &SolverOptions) -> Result<IsaacsSolution> {
    march(spec, init, opts)
}

/// Largest admissible time step at u.
pub fn cfl_limit(spec: &EquationSpec, u: &GridFunction, disc: &Discretization) -> Result<f64> {
    check_init(spec, u)?;
    Ok(0.5 / CompiledSpec::new(spec, disc)?.stiffness(u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    pub dt: f64,
    pub steps: usize,
    /// Largest violation of the maximum-principle envelope (0 when it holds);
    /// None when the equation has a negative zeroth-order term.
    pub max_principle_excess: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &GridFunction {
        self.snapshots.last().expect("trajectories hold at least the initial field")
    }
}

/// Explicit Euler for u_t + F(u) = f on [0, T]. The step is shortened to
/// divide T evenly; `snapshots` evenly spaced states are kept besides u0.
pub fn solve_parabolic(
    spec: &EquationSpec,
    u0: &GridFunction,
    t_final: f64,
    dt: f64,
    snapshots: usize,
    disc: &Discretization,
) -> Result<Trajectory> {
    check_init(spec, u0)?;
    if !(t_final > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidInput("T and dt must be positive".into()));
    }
    let c = CompiledSpec::new(spec, disc)?;
    let limit = 0.5 / c.stiffness(u0);
    if dt > limit {
        return Err(Error::InvalidInput(format!("dt = {dt:e} exceeds the CFL limit {limit:e}")));
    }
    let steps = (t_final / dt).ceil() as usize;
    let dt = t_final / steps as f64;
    let every = (steps / snapshots.max(1)).max(1);
    let m = spec.source_bound();
    let c_min = spec.variant_indices().map(|(i, j)| spec.zeroth_order(i, j)).fold(f64::INFINITY, f64::min);
    let growth = (-c_min).max(0.0);
    let has_zeroth = spec.all_terms().any(|t| matches!(t, super::spec::Term::ZerothOrder { .. }));
    let (lo0, hi0) = if has_zeroth { (u0.min().min(0.0), u0.max().max(0.0)) } else { (u0.min(), u0.max()) };
    let mut excess: f64 = 0.0;
    let mut u = u0.clone();
    let mut times = vec![0.0];
    let mut snaps = vec![u0.clone()];
    for step in 1..=steps {
        let r = c.residual(&u)?;
        for (x, ri) in u.values.iter_mut().zip(&r.residual.values) {
            *x -= dt * ri;
        }
        let t = step as f64 * dt;
        let norm = u.sup_norm();
        let bound = 2.0 * (u0.sup_norm() + t * m) * (growth * t).exp() + 1e-9;
        if !norm.is_finite() || norm > bound {
            return Err(Error::Instability { time: t, norm, bound });
        }
        if growth == 0.0 {
            excess = excess.max(lo0 - t * m - u.min()).max(u.max() - hi0 - t * m);
        }
        if step % every == 0 || step == steps {
            if times.last() != Some(&t) {
                times.push(t);
                snaps.push(u.clone());
            }
        }
    }
    Ok(Trajectory {
        times,
        snapshots: snaps,
        dt,
        steps,
        max_principle_excess: (growth == 0.0).then_some(excess.max(0.0)),
    })
}
