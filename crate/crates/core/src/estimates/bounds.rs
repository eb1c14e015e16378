//! Assembled Hölder, Lipschitz and quadratic bounds.

use super::concave::m1_sup;
use super::doubling::{locate_max_quadratic, DoublingGeometry, MaxPoint};
use super::phi::{PhiFamily, TestFunctionPhi};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::levy::{cone_mass_at, ConditionReport, ConeSpec, JumpFunction, LevyKernel, SamplePlan};
use crate::operators::{eval_levy_ito, OperatorQuadrature, SplitSpec};
use crate::quadrature::{AngularResolution, QuadratureConfig, Region};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Constants of (M1) and (M3) entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConstants {
    pub c_tilde: f64,
    pub c_ball: f64,
    pub c_ring: f64,
    pub gamma: f64,
}

impl MeasureConstants {
    pub fn from_report(report: &ConditionReport) -> Result<MeasureConstants> {
        let get = |cond: &str, name: &str| {
            report
                .get(cond)
                .and_then(|r| r.constant(name))
                .ok_or_else(|| Error::InvalidInput(format!("report lacks {cond}.{name}")))
        };
        let gamma = report.get("M3").and_then(|r| r.constant("gamma")).filter(|g| g.is_finite()).unwrap_or(1.0);
        Ok(MeasureConstants {
            c_tilde: get("M1", "C_tilde")?,
            c_ball: get("M3", "C_mu_ball")?,
            c_ring: get("M3", "C_mu_ring")?,
            gamma,
        })
    }

    /// Measured through the standard sample plan.
    pub fn measure(kernel: &LevyKernel, cfg: &QuadratureConfig) -> Result<MeasureConstants> {
        let report = crate::levy::verify_measure_conditions(kernel, &SamplePlan::standard(kernel.dim), cfg)?;
        Self::from_report(&report)
    }
}

/// A bound of the form −L|a|^E(leading − o) + O.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound: f64,
    /// Exponent E of |a|.
    pub exponent: f64,
    /// C(μ) from the measured cone mass.
    pub c_mu: f64,
    /// αC(μ) (Hölder) or Θ = C(μ)(ρα2^{α−1} − 1) (Lipschitz).
    pub leading: f64,
    pub o_term: f64,
    pub big_o: f64,
    /// Largest |a| of the dyadic scan below which the bound stays negative.
    pub threshold: Option<f64>,
}

/// inf over sample points of ∫_{C_{η,δ}(â)} |z|² μ_x.
fn cone_inf(kernel: &LevyKernel, axis: &[f64], eta: f64, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let cone = ConeSpec::new(axis, eta, delta)?;
    let points = if kernel.is_x_independent() { vec![vec![0.0; kernel.dim]] } else { SamplePlan::standard(kernel.dim).points };
    let mut best = f64::INFINITY;
    for x in &points {
        best = best.min(cone_mass_at(kernel, x, &cone, cfg)?.value);
    }
    Ok(best)
}

fn ring_scale(beta: f64, r: f64) -> f64 {
    if (beta - 1.0).abs() < 1e-12 {
        r.ln().abs()
    } else {
        r.powf(1.0 - beta)
    }
}

/// Largest 2^{−k}|a| (k = 0..40) with the bound negative there and at every
/// smaller scale of the scan.
fn dyadic_threshold(a: &[f64], mut eval: impl FnMut(&[f64]) -> Result<f64>) -> Result<Option<f64>> {
    let mut threshold = None;
    for k in (0..=40).rev() {
        let s = 0.5f64.powi(k);
        let b: Vec<f64> = a.iter().map(|v| v * s).collect();
        if eval(&b)? < 0.0 {
            threshold = Some(norm(&b));
        } else {
            break;
        }
    }
    Ok(threshold)
}

fn check_norms(norms: (f64, f64)) -> Result<()> {
    if !(norms.0 >= 0.0 && norms.1 >= 0.0) {
        return Err(Error::InvalidInput("sup norms must be nonnegative".into()));
    }
    Ok(())
}

/// −L|a|^{α−β}(αC(μ) − o) + O for the Hölder test function; the cone geometry
/// (η, δ0) is taken from `geom`.
pub fn holder_bound(
    kernel: &LevyKernel,
    phi: &TestFunctionPhi,
    geom: &DoublingGeometry,
    norms: (f64, f64),
    consts: &MeasureConstants,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    check_norms(norms)?;
    if phi.family != PhiFamily::Holder {
        return Err(Error::InvalidInput("holder_bound needs the holder family".into()));
    }
    let (alpha, beta, l) = (phi.alpha, kernel.beta, phi.l);
    if !(alpha < beta.min(1.0)) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be below min(beta, 1) = {}", beta.min(1.0))));
    }
    if !(geom.delta0 < 0.5) {
        return Err(Error::InvalidInput(format!("delta0 = {} must be below 1/2", geom.delta0)));
    }
    let e2 = geom.eta_tilde * geom.eta_tilde;
    if !((2.0 - alpha) * e2 > 1.0) {
        return Err(Error::InvalidInput(format!("(2 - alpha) eta_tilde^2 = {} must exceed 1", (2.0 - alpha) * e2)));
    }
    let floor = (norms.0 + norms.1) / phi.t0.powf(alpha);
    if !(l > floor) {
        return Err(Error::InvalidInput(format!("L = {l} must exceed (|u| + |v|)/t0^alpha = {floor}")));
    }
    let big_o = 4.0 * consts.c_tilde * norms.0.max(norms.1);
    let d0 = geom.delta0;
    let eval = |a: &[f64]| -> Result<(f64, f64, f64)> {
        let na = norm(a);
        let mass = cone_inf(kernel, a, geom.eta, na * d0, cfg)?;
        let c_mu = ((2.0 - alpha) * e2 - 1.0) * (1.0 + d0).powf(alpha - 2.0) * mass / na.powf(2.0 - beta);
        let ring = if (beta - 1.0).abs() < 1e-12 {
            ring_scale(beta, na * d0)
        } else {
            d0.powf(1.0 - beta)
        };
        let o = 2.0 * alpha * consts.c_ring * na.powf(consts.gamma) * ring
            + alpha * (1.0 - d0).powf(alpha - 2.0) * consts.c_ball * na.powf(consts.gamma) * d0.powf(2.0 - beta);
        let bound = -l * na.powf(alpha - beta) * (alpha * c_mu - o) + big_o;
        Ok((bound, c_mu, o))
    };
    let (bound, c_mu, o_term) = eval(&geom.a)?;
    let threshold = dyadic_threshold(&geom.a, |a| eval(a).map(|r| r.0))?;
    Ok(BoundReport { bound, exponent: alpha - beta, c_mu, leading: alpha * c_mu, o_term, big_o, threshold })
}

/// −L|a|^E(Θ − o) + O with E = (1 − β) + α(d + 2 − β), for the regularized
/// Lipschitz test function and the cone geometry η̃ = 1 − |a|^α η̃0,
/// δ0 = |a|^α η̃0/2, η = |a|^{2α} η̃0²/2.
pub fn lipschitz_bound(
    kernel: &LevyKernel,
    phi: &TestFunctionPhi,
    a: &[f64],
    eta_tilde0: f64,
    norms: (f64, f64),
    consts: &MeasureConstants,
    cfg: &QuadratureConfig,
) -> Result<BoundReport> {
    check_norms(norms)?;
    if phi.family != PhiFamily::LipschitzRegularized {
        return Err(Error::InvalidInput("lipschitz_bound needs the lipschitz-regularized family".into()));
    }
    let (alpha, beta, l, rho) = (phi.alpha, kernel.beta, phi.l, phi.rho);
    let d = kernel.dim as f64;
    if !(beta > 1.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} must exceed 1")));
    }
    let cap = (consts.gamma / (d + 1.0)).min((beta - 1.0) / (d + 2.0 - beta));
    if !(alpha < cap) {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} must be below min(gamma/(d+1), (beta-1)/(d+2-beta)) = {cap}"
        )));
    }
    if !(eta_tilde0 > 0.0 && eta_tilde0 < 0.25) {
        return Err(Error::InvalidInput(format!("eta_tilde0 = {eta_tilde0} must lie in (0, 1/4)")));
    }
    let theta0 = rho * alpha * 2f64.powf(alpha - 1.0) - 1.0;
    if !(theta0 > 0.0) {
        return Err(Error::InvalidInput(format!("rho*alpha*2^(alpha-1) - 1 = {theta0} must be positive")));
    }
    let floor = (norms.0 + norms.1) * (alpha + 1.0) / (phi.t0 * alpha);
    if !(l > floor) {
        return Err(Error::InvalidInput(format!("L = {l} must exceed (|u| + |v|)(alpha+1)/(t0 alpha) = {floor}")));
    }
    if !(norm(a) > 0.0) {
        return Err(Error::InvalidInput("a must be nonzero".into()));
    }
    let exponent = (1.0 - beta) + alpha * (d + 2.0 - beta);
    let big_o = 4.0 * consts.c_tilde * norms.0.max(norms.1);
    let eval = |a: &[f64]| -> Result<(f64, f64, f64)> {
        let na = norm(a);
        let d0 = na.powf(alpha) * eta_tilde0 / 2.0;
        let eta = na.powf(2.0 * alpha) * eta_tilde0 * eta_tilde0 / 2.0;
        let delta = na * d0;
        let mass = cone_inf(kernel, a, eta, delta, cfg)?;
        let c_mu = mass / na.powf(alpha * (d - 1.0) + (1.0 + alpha) * (2.0 - beta));
        let scale = l * na.powf(exponent);
        let o = (2.0 * l * consts.c_ring * na.powf(consts.gamma) * ring_scale(beta, delta)
            + l * consts.c_ball * na.powf(consts.gamma) * delta.powf(2.0 - beta) / (na * (1.0 - d0)))
            / scale;
        Ok((-scale * (c_mu * theta0 - o) + big_o, c_mu, o))
    };
    let (bound, c_mu, o_term) = eval(a)?;
    let threshold = dyadic_threshold(a, |b| eval(b).map(|r| r.0))?;
    Ok(BoundReport { bound, exponent, c_mu, leading: c_mu * theta0, o_term, big_o, threshold })
}

/// 2C0²ε⁻²∫_{B_δ}|z|²μ + C0²|a|^{2γ}ε⁻²C̃_μ + 2C0|a|^{γ+1}ε⁻²C̃_μ.
pub fn quadratic_bound(
    jump: &JumpFunction,
    kernel: &LevyKernel,
    eps: f64,
    a: &[f64],
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(Error::InvalidInput(format!("eps = {eps}, delta = {delta} must be positive")));
    }
    if !kernel.is_x_independent() {
        return Err(Error::Unsupported("quadratic bound with an x-dependent measure".into()));
    }
    let c0 = jump.big_c0;
    let g = jump.gamma;
    let origin = vec![0.0; kernel.dim];
    let ball = kernel
        .integrate(&origin, &Region::ball(delta), AngularResolution::Fixed(64), cfg, |z| z.iter().map(|v| v * v).sum())?
        .value;
    let na = norm(a);
    let e2 = eps * eps;
    let mut bound = 2.0 * c0 * c0 * ball / e2;
    if na > 0.0 {
        let c_tilde = m1_sup(kernel, &[], cfg)?;
        bound += c0 * c0 * na.powf(2.0 * g) / e2 * c_tilde + 2.0 * c0 * na.powf(g + 1.0) / e2 * c_tilde;
    }
    Ok(bound)
}

/// Direct lhs J[x̄,p,u] − J[ȳ,p,u] at the maximum of the quadratic doubling,
/// with p = 2a/ε², next to the quadratic bound.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCheck {
    pub maxpoint: MaxPoint,
    pub lhs: f64,
    pub bound: f64,
}

impl QuadraticCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound + 1e-6 * (1.0 + self.bound.abs())
    }
}

pub fn quadratic_check(
    jump: &JumpFunction,
    kernel: &LevyKernel,
    u: &GridFunction,
    eps: f64,
    delta: f64,
    oq: &OperatorQuadrature,
) -> Result<QuadraticCheck> {
    let mp = locate_max_quadratic(u, u, eps)?;
    mp.require_nondegenerate()?;
    let p: Vec<f64> = mp.a.iter().map(|v| 2.0 * v / (eps * eps)).collect();
    let split = SplitSpec::new(0.5 * u.geometry.h())?.with_gradient(p);
    let lhs = eval_levy_ito(jump, kernel, u, &mp.x, &split, oq)? - eval_levy_ito(jump, kernel, u, &mp.y, &split, oq)?;
    let bound = quadratic_bound(jump, kernel, eps, &mp.a, delta, &oq.cfg)?;
    Ok(QuadraticCheck { maxpoint: mp, lhs, bound })
}
