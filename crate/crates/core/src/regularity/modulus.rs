//! Empirical moduli of continuity and log-log exponent fits.

use crate::error::{Error, Result};
use crate::grid::{wrap_half, Block, Geometry, GridFunction};
use rayon::prelude::*;

/// Largest pair count (offsets × lattice points) a modulus may enumerate.
pub const PAIR_BUDGET: usize = 1 << 28;

/// Least-squares fit log ω ≈ log L + α log t on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub alpha: f64,
    pub l: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// ω(t) sampled at t = m·h, m = 1..=n/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub direction: Block,
    pub n: usize,
    pub h: f64,
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
    pub fit: Option<ExponentFit>,
}

impl ModulusReport {
    /// [4h, 0.1], clipped to the sampled range.
    pub fn default_window(&self) -> (f64, f64) {
        let t_max = self.t.last().copied().unwrap_or(0.0).min(0.1);
        (4.0 * self.h, t_max)
    }

    pub fn fitted(mut self, t_min: f64, t_max: f64) -> Result<ModulusReport> {
        self.fit = Some(fit_exponent(&self, t_min, t_max)?);
        Ok(self)
    }

    /// ω at the m-th separation (m ≥ 1).
    pub fn at(&self, m: usize) -> f64 {
        self.omega[m - 1]
    }

    /// max over m ≤ m_max of ω(mh)/(mh).
    pub fn lipschitz_ratio(&self, m_max: usize) -> f64 {
        self.t.iter().zip(&self.omega).take(m_max.max(1)).map(|(t, w)| w / t).fold(0.0, f64::max)
    }
}

/// Lattice axes spanned by a direction; errors on an empty block.
pub(crate) fn direction_axes(g: &Geometry, direction: Block) -> Result<Vec<usize>> {
    let axes: Vec<usize> = g.axes(direction).collect();
    if axes.is_empty() {
        return Err(Error::GeometryMismatch(format!("block {} is empty", direction.label())));
    }
    Ok(axes)
}

/// ω(t) = max |u(x) − u(y)| over lattice pairs whose separation lies in the
/// selected block, has norm ≤ t, and vanishes in the other block.
pub fn modulus(u: &GridFunction, direction: Block) -> Result<ModulusReport> {
    let g = u.geometry;
    let axes = direction_axes(&g, direction)?;
    let n = g.n;
    let h = g.h();
    let count = n.pow(axes.len() as u32);
    if count.saturating_mul(g.len()) > PAIR_BUDGET {
        return Err(Error::InvalidInput(format!(
            "modulus over {count} offsets on {} points exceeds the pair budget",
            g.len()
        )));
    }
    let idx: Vec<[usize; 3]> = (0..g.len()).map(|i| g.unravel(i)).collect();
    let strides: Vec<usize> = (0..g.d()).map(|a| g.stride(a)).collect();
    let mut diffs: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut shift = [0usize; 3];
            let mut rest = k;
            let mut dist2 = 0.0;
            for &a in axes.iter().rev() {
                shift[a] = rest % n;
                rest /= n;
                let s = wrap_half(shift[a] as f64 * h);
                dist2 += s * s;
            }
            let mut top = 0.0f64;
            for (xi, ix) in idx.iter().enumerate() {
                let mut yi = 0;
                for (a, st) in strides.iter().enumerate() {
                    yi += st * ((ix[a] + n - shift[a]) % n);
                }
                top = top.max((u.values[xi] - u.values[yi]).abs());
            }
            (dist2.sqrt(), top)
        })
        .collect();
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut t = Vec::with_capacity(n / 2);
    let mut omega = Vec::with_capacity(n / 2);
    let mut running = 0.0f64;
    let mut next = 0;
    for m in 1..=n / 2 {
        let tm = m as f64 * h;
        while next < diffs.len() && diffs[next].0 <= tm * (1.0 + 1e-12) {
            running = running.max(diffs[next].1);
            next += 1;
        }
        t.push(tm);
        omega.push(running);
    }
    Ok(ModulusReport { direction, n, h, t, omega, fit: None })
}

/// Fits log ω against log t over the samples with t in [t_min, t_max].
pub fn fit_exponent(report: &ModulusReport, t_min: f64, t_max: f64) -> Result<ExponentFit> {
    let window: Vec<(f64, f64)> = report
        .t
        .iter()
        .zip(&report.omega)
        .filter(|(t, _)| **t >= t_min * (1.0 - 1e-12) && **t <= t_max * (1.0 + 1e-12))
        .map(|(t, w)| (*t, *w))
        .collect();
    if window.len() < 2 {
        return Err(Error::UnfitTable(format!("window [{t_min}, {t_max}] holds {} samples", window.len())));
    }
    if let Some((t, w)) = window.iter().find(|(_, w)| !(*w > 0.0)) {
        return Err(Error::UnfitTable(format!("omega({t}) = {w} is not positive")));
    }
    let pts: Vec<(f64, f64)> = window.iter().map(|(t, w)| (t.ln(), w.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - alpha * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(ExponentFit { alpha, l: intercept.exp(), t_min, t_max, residual, points: pts.len() })
}
