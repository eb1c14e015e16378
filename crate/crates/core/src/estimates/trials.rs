//! Randomized instances of the estimates with per-trial seeds.

use super::bounds::quadratic_check;
use super::concave::{concave_estimate_sides, levy_ito_concave_sides, EstimateSides};
use super::doubling::{locate_max, phi_seminorm, DoublingGeometry, MaxPoint};
use super::phi::TestFunctionPhi;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Geometry, GridFunction};
use crate::levy::{JumpFunction, JumpMap, LevyKernel};
use crate::operators::OperatorQuadrature;
use crate::rng::{trial_rng, uniform, TrialRng};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialKind {
    Concave,
    LevyIto,
    Quadratic,
}

impl TrialKind {
    pub fn label(self) -> &'static str {
        match self {
            TrialKind::Concave => "concave",
            TrialKind::LevyIto => "levy-ito",
            TrialKind::Quadratic => "quadratic",
        }
    }
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub seed: u64,
    pub trial: u64,
    pub estimate: String,
    pub kernel: String,
    pub phi: String,
    pub a_norm: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// pass, fail or skipped.
    pub status: String,
    pub note: String,
}

/// Lattice sizes and quadrature for the trials.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub n1: usize,
    pub n2: usize,
    pub attempts: usize,
    pub oq: OperatorQuadrature,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { n1: 256, n2: 32, attempts: 40, oq: OperatorQuadrature::default() }
    }
}

/// Sum of three random Fourier modes with integer frequencies up to `max_freq`
/// per axis, scaled to sup norm 1.
pub fn random_field(rng: &mut TrialRng, g: Geometry, max_freq: i32) -> GridFunction {
    let d = g.d();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..3)
        .map(|_| {
            let k: Vec<f64> = loop {
                let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-max_freq..=max_freq) as f64).collect();
                if k.iter().any(|v| *v != 0.0) {
                    break k;
                }
            };
            (k, uniform(rng, 0.0, 2.0 * PI), uniform(rng, 0.3, 1.0))
        })
        .collect();
    let u = GridFunction::from_fn(g, |x| {
        modes
            .iter()
            .map(|(k, ph, c)| c * (2.0 * PI * k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + ph).sin())
            .sum()
    });
    let s = u.sup_norm().max(1e-12);
    u.map(|v| v / s)
}

/// j(x,z) = (1 + 0.1 sin 2πx1)z, with c0 = 0.9, C0 = 1.1, γ = 1.
pub fn modulated_jump(dim: usize) -> JumpFunction {
    let f = Arc::new(|x: &[f64], z: &[f64], out: &mut [f64]| {
        let s = 1.0 + 0.1 * (2.0 * PI * x[0]).sin();
        for (o, v) in out.iter_mut().zip(z) {
            *o = s * v;
        }
    });
    JumpFunction::new(dim, JumpMap::Func(f), 0.9, 1.1, 1.0, 0.0).unwrap()
}

/// j(x,z) = z(1 + 0.1 sin(2πx1)/(1 + |z|)): bounded jump differences for
/// large z.
pub fn saturating_jump(dim: usize) -> JumpFunction {
    let f = Arc::new(|x: &[f64], z: &[f64], out: &mut [f64]| {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = 1.0 + 0.1 * (2.0 * PI * x[0]).sin() / (1.0 + r);
        for (o, v) in out.iter_mut().zip(z) {
            *o = s * v;
        }
    });
    JumpFunction::new(dim, JumpMap::Func(f), 0.9, 1.1, 1.0, 0.0).unwrap()
}

struct Instance {
    dim: usize,
    beta: f64,
    kernel: LevyKernel,
}

fn instance(trial: u64, modulated: bool) -> Instance {
    let dim = 1 + (trial % 2) as usize;
    let beta = if (trial / 2) % 2 == 0 { 0.5 } else { 1.5 };
    let kernel = if modulated {
        let c = ScalarField::func(|x: &[f64]| 1.0 + 0.3 * (2.0 * PI * x[0]).sin());
        LevyKernel::x_modulated(dim, beta, c, 1.0).unwrap()
    } else {
        LevyKernel::fractional(dim, beta).unwrap()
    };
    Instance { dim, beta, kernel }
}

fn geometry_for(cfg: &TrialConfig, dim: usize) -> Geometry {
    Geometry::new(dim, 0, if dim == 1 { cfg.n1 } else { cfg.n2 }).unwrap()
}

fn row(seed: u64, trial: u64, kind: TrialKind, kernel: String, phi: String, out: Result<(EstimateSides, f64)>) -> TrialRow {
    match out {
        Ok((s, a)) => TrialRow {
            seed,
            trial,
            estimate: kind.label().into(),
            kernel,
            phi,
            a_norm: a,
            lhs: s.lhs,
            rhs: s.rhs,
            margin: s.margin(),
            status: if s.holds() { "pass" } else { "fail" }.into(),
            note: s.terms.iter().map(|(n, v)| format!("{n}={v:.6e}")).collect::<Vec<_>>().join(";"),
        },
        Err(e) => TrialRow {
            seed,
            trial,
            estimate: kind.label().into(),
            kernel,
            phi,
            a_norm: f64::NAN,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            status: "skipped".into(),
            note: e.to_string(),
        },
    }
}

/// φ with L = 1; the trials rescale L against the field.
fn draw_phi(rng: &mut TrialRng, lipschitz: bool) -> Result<TestFunctionPhi> {
    if lipschitz {
        let alpha = uniform(rng, 0.8, 1.0);
        let c = uniform(rng, 1.05, 1.5);
        let rho = c / (alpha * 2f64.powf(alpha - 1.0));
        TestFunctionPhi::lipschitz(1.0, alpha, rho)
    } else {
        TestFunctionPhi::holder(1.0, uniform(rng, 0.3, 0.9), uniform(rng, 0.3, 0.45))
    }
}

/// v = u, or v = u plus a small independent random field.
fn draw_pair(rng: &mut TrialRng, g: Geometry, max_freq: i32, perturbed: bool) -> (GridFunction, GridFunction) {
    let u = random_field(rng, g, max_freq);
    if !perturbed {
        return (u.clone(), u);
    }
    let w = random_field(rng, g, max_freq);
    let v = u.zip_with(&w, |a, b| a + 0.1 * b).unwrap();
    (u, v)
}

/// Rescales φ to κ times the φ-seminorm of (u, v) below t0, κ ∈ [0.4, 0.95],
/// so that the doubling maximum is positive with x̄ ≠ ȳ whenever the
/// seminorm is positive.
fn scaled_max(rng: &mut TrialRng, u: &GridFunction, v: &GridFunction, phi: TestFunctionPhi) -> Result<Option<(TestFunctionPhi, MaxPoint)>> {
    let s = phi_seminorm(u, v, &phi)?;
    if !(s > 0.0 && s.is_finite()) {
        return Ok(None);
    }
    let phi = phi.with_l(uniform(rng, 0.4, 0.95) * s)?;
    let mp = locate_max(u, v, &phi)?;
    Ok((!mp.degenerate).then_some((phi, mp)))
}

/// Concave estimate for general kernels: dimension, β, φ family and kernel
/// type cycle with the trial index; fields and parameters are random.
pub fn concave_trial(seed: u64, trial: u64, cfg: &TrialConfig) -> TrialRow {
    let modulated = (trial / 8) % 2 == 1;
    let inst = instance(trial, modulated);
    let lipschitz = (trial / 4) % 2 == 1;
    let mut rng = trial_rng(seed, trial);
    let g = geometry_for(cfg, inst.dim);
    let mut phi_label = String::new();
    let out = (|| {
        for _ in 0..cfg.attempts {
            let phi = draw_phi(&mut rng, lipschitz)?;
            let perturbed = rng.gen_bool(0.5);
            let (u, v) = draw_pair(&mut rng, g, 3, perturbed);
            let Some((phi, mp)) = scaled_max(&mut rng, &u, &v, phi)? else { continue };
            phi_label = phi.to_string();
            let geom = DoublingGeometry::new(mp.a.clone(), uniform(&mut rng, 0.1, 0.4), uniform(&mut rng, 0.05, 0.3))?;
            let s = concave_estimate_sides(&inst.kernel, &u, &v, &phi, &geom, &mp, &cfg.oq)?;
            return Ok((s, mp.norm_a()));
        }
        Err(Error::Degenerate(format!("no positive maximum with distinct points in {} draws", cfg.attempts)))
    })();
    row(seed, trial, TrialKind::Concave, format!("{} beta={}", inst.kernel.id(), inst.beta), phi_label, out)
}

/// Lévy–Itô concave estimate with j(x,z) = (1 + 0.1 sin 2πx1)z.
pub fn levy_ito_trial(seed: u64, trial: u64, cfg: &TrialConfig) -> TrialRow {
    let inst = instance(trial, false);
    let jump = modulated_jump(inst.dim);
    let mut rng = trial_rng(seed, trial);
    let g = geometry_for(cfg, inst.dim);
    let mut phi_label = String::new();
    let out = (|| {
        for _ in 0..cfg.attempts {
            let phi = TestFunctionPhi::holder(1.0, uniform(&mut rng, 0.5, 0.9), 0.3)?;
            let perturbed = rng.gen_bool(0.5);
            let (u, v) = draw_pair(&mut rng, g, 5, perturbed);
            let Some((phi, mp)) = scaled_max(&mut rng, &u, &v, phi)? else { continue };
            phi_label = phi.to_string();
            let eta = uniform(&mut rng, 0.3, 0.6);
            let geom = DoublingGeometry::new(mp.a.clone(), eta, uniform(&mut rng, 0.05, 0.3))?;
            match levy_ito_concave_sides(&jump, &inst.kernel, &u, &v, &phi, &geom, &mp, &cfg.oq) {
                Err(Error::InvalidInput(_)) => continue,
                other => return other.map(|s| (s, mp.norm_a())),
            }
        }
        Err(Error::Degenerate(format!("no admissible maximum in {} draws", cfg.attempts)))
    })();
    row(seed, trial, TrialKind::LevyIto, format!("{} jump=modulated", inst.kernel.id()), phi_label, out)
}

/// Quadratic estimate with the identity or a saturating modulated jump.
pub fn quadratic_trial(seed: u64, trial: u64, cfg: &TrialConfig) -> TrialRow {
    let inst = instance(trial, false);
    let saturating = (trial / 4) % 2 == 1;
    let jump = if saturating { saturating_jump(inst.dim) } else { JumpFunction::identity(inst.dim) };
    let mut rng = trial_rng(seed, trial);
    let g = geometry_for(cfg, inst.dim);
    let eps = uniform(&mut rng, 0.1, 0.5);
    let delta = uniform(&mut rng, 0.05, 0.3);
    let u = random_field(&mut rng, g, 3);
    let out = quadratic_check(&jump, &inst.kernel, &u, eps, delta, &cfg.oq).map(|q| {
        let a = q.maxpoint.norm_a();
        (EstimateSides { lhs: q.lhs, rhs: q.bound, terms: vec![], s_grid: 0 }, a)
    });
    let label = format!("{} jump={}", inst.kernel.id(), if saturating { "saturating" } else { "identity" });
    row(seed, trial, TrialKind::Quadratic, label, format!("quadratic(eps={eps},delta={delta})"), out)
}

/// Trials 0..count of one kind, run concurrently, returned in trial order.
pub fn run_trials(kind: TrialKind, seed: u64, count: u64, cfg: &TrialConfig) -> Vec<TrialRow> {
    (0..count)
        .into_par_iter()
        .map(|t| match kind {
            TrialKind::Concave => concave_trial(seed, t, cfg),
            TrialKind::LevyIto => levy_ito_trial(seed, t, cfg),
            TrialKind::Quadratic => quadratic_trial(seed, t, cfg),
        })
        .collect()
}
