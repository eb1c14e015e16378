//! Fourier symbol of the unnormalized fractional kernel.
//!
//! m(β, ξ) = ∫ (1 − cos(ξ·z)) |z|^{−d−β} dz = c_{d,β} |ξ|^β, with
//! c_{1,β} = 2 ∫_0^∞ (1 − cos t) t^{−1−β} dt and
//! c_{d,β} = (c_{1,β}/2) ∫_{S^{d−1}} |ω_1|^β dω.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use std::f64::consts::PI;

/// ∫_0^∞ (1 − cos t) t^{−1−β} dt.
fn half_line_constant(beta: f64) -> f64 {
    // [0, 1]: termwise integration of the cosine series.
    let mut inner = 0.0;
    let mut fact = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        fact *= (2.0 * kf - 1.0) * (2.0 * kf);
        let term = 1.0 / (fact * (2.0 * kf - beta));
        inner += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    // [1, T]: Gauss panels of a quarter period.
    let s = 1.0 + beta;
    let rule = gauss_legendre(16);
    let panels = 1600;
    let t_end = 1.0 + panels as f64 * PI / 2.0;
    let osc = rule.integrate(1.0, t_end, panels, |t| t.cos() * t.powf(-s));
    // [T, ∞): asymptotic expansion by repeated integration by parts.
    let (st, ct) = (t_end.sin(), t_end.cos());
    let tail = -st * t_end.powf(-s) + s * ct * t_end.powf(-s - 1.0) + s * (s + 1.0) * st * t_end.powf(-s - 2.0)
        - s * (s + 1.0) * (s + 2.0) * ct * t_end.powf(-s - 3.0);
    inner + 1.0 / beta - (osc + tail)
}

/// ∫ over dyadic cells of [0, b] of a function vanishing like a power at 0.
fn dyadic(b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(16);
    let mut total = 0.0;
    let mut hi = b;
    for _ in 0..200 {
        let c = rule.integrate(0.5 * hi, hi, 1, &f);
        total += c;
        if c.abs() < 1e-18 * total.abs() {
            break;
        }
        hi *= 0.5;
    }
    total
}

/// ∫_{S^{d−1}} |ω_1|^β dω for d ≤ 3, by quadrature.
pub fn sphere_moment(d: usize, beta: f64) -> Result<f64> {
    match d {
        1 => Ok(2.0),
        2 => Ok(4.0 * dyadic(PI / 2.0, |t| t.sin().powf(beta))),
        3 => Ok(2.0 * PI * 2.0 * dyadic(1.0, |t| t.powf(beta))),
        _ => Err(Error::Unsupported(format!("fractional symbol in dimension {d}"))),
    }
}

/// c_{d,β} such that m(β, ξ) = c_{d,β} |ξ|^β.
pub fn fractional_constant(d: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 2)")));
    }
    Ok(half_line_constant(beta) * sphere_moment(d, beta)?)
}

/// m(β, |ξ|) in dimension d.
pub fn fractional_multiplier(d: usize, beta: f64, xi_norm: f64) -> Result<f64> {
    Ok(fractional_constant(d, beta)? * xi_norm.abs().powf(beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_case_is_pi() {
        assert!((fractional_constant(1, 1.0).unwrap() - PI).abs() < 1e-10);
        let m = fractional_multiplier(1, 1.0, 2.0 * PI).unwrap();
        assert!((m - 2.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn sphere_moments() {
        for beta in [0.3, 1.0, 1.7] {
            let s3 = sphere_moment(3, beta).unwrap();
            assert!((s3 - 4.0 * PI / (beta + 1.0)).abs() < 1e-12);
        }
        assert!((sphere_moment(2, 2.0).unwrap() - PI).abs() < 1e-12);
    }
}
