//! Sign analysis for partially regularizing equations: when does the local
//! trace term, and when does the nonlocal cone term, become negative for
//! a = (a1, a2)?

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    /// 1 + (α − 2)|a1|²/|a|².
    pub local_factor: f64,
    /// 4Lα|a|^{α−2}·local_factor.
    pub local_trace: f64,
    /// 1 + η̃²(α − 2)|a2|²/|a|².
    pub nonlocal_factor: f64,
    pub local_active: bool,
    pub nonlocal_active: bool,
    /// 1/(2 − α): the local factor is negative iff |a1|²/|a|² exceeds it.
    pub local_threshold: f64,
    /// 1/(η̃²(2 − α)) for |a2|²/|a|², None when it exceeds 1.
    pub nonlocal_threshold: Option<f64>,
    /// Sign changes of the factors located by bisection on |a_i|/|a|, squared.
    pub local_threshold_bisected: f64,
    pub nonlocal_threshold_bisected: Option<f64>,
}

/// Root of an increasing-to-decreasing sign change of f on [0, 1] by bisection
/// to `tol`.
fn bisect(f: impl Fn(f64) -> f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(lo) < 0.0 || f(hi) >= 0.0 {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

pub fn directional_sign_analysis(a1: &[f64], a2: &[f64], alpha: f64, l: f64, eta_tilde: f64) -> Result<SignReport> {
    let n1: f64 = a1.iter().map(|v| v * v).sum();
    let n2: f64 = a2.iter().map(|v| v * v).sum();
    let na2 = n1 + n2;
    if !(na2 > 0.0) {
        return Err(Error::InvalidInput("a must be nonzero".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1)")));
    }
    let local = |t: f64| 1.0 + (alpha - 2.0) * t * t;
    let nonlocal = |t: f64| 1.0 + eta_tilde * eta_tilde * (alpha - 2.0) * t * t;
    let local_factor = 1.0 + (alpha - 2.0) * n1 / na2;
    let nonlocal_factor = 1.0 + eta_tilde * eta_tilde * (alpha - 2.0) * n2 / na2;
    let nt = 1.0 / (eta_tilde * eta_tilde * (2.0 - alpha));
    let tol = 1e-9;
    Ok(SignReport {
        local_factor,
        local_trace: 4.0 * l * alpha * na2.sqrt().powf(alpha - 2.0) * local_factor,
        nonlocal_factor,
        local_active: local_factor < 0.0,
        nonlocal_active: nonlocal_factor < 0.0,
        local_threshold: 1.0 / (2.0 - alpha),
        nonlocal_threshold: (nt < 1.0).then_some(nt),
        local_threshold_bisected: bisect(local, tol).map(|t| t * t).unwrap_or(f64::NAN),
        nonlocal_threshold_bisected: bisect(nonlocal, tol).map(|t| t * t),
    })
}
