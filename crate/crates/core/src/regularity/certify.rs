//! Seminorm certification through the sign of the doubling maximum.

use super::modulus::direction_axes;
use crate::error::Result;
use crate::estimates::{locate_max, partial_locate_max, MaxPoint, TestFunctionPhi};
use crate::grid::{Block, Geometry, GridFunction};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Smallest L with max [u(x) − u(y) − L·φ₁(|x − y|)] ≤ 0.
    pub l_min: f64,
    /// Pair (x, y) attaining the quotient; None for fields constant along
    /// the direction.
    pub pair: Option<(usize, usize)>,
    pub bisection_steps: usize,
    pub refinement_steps: usize,
}

/// Distance between lattice points x and y measured in the given axes, or
/// None when they differ outside those axes.
fn block_distance(g: &Geometry, axes: &[usize], x: usize, y: usize) -> Option<f64> {
    let (ix, iy) = (g.unravel(x), g.unravel(y));
    if (0..g.d()).any(|a| !axes.contains(&a) && ix[a] != iy[a]) {
        return None;
    }
    let (cx, cy) = (g.coords(x), g.coords(y));
    let px: Vec<f64> = axes.iter().map(|&a| cx[a]).collect();
    let py: Vec<f64> = axes.iter().map(|&a| cy[a]).collect();
    Some(Geometry::torus_dist(&px, &py))
}

/// (u(x) − u(y))/φ₁(d(x, y)), with φ₁ the unit-scale member of the family.
fn quotient(u: &GridFunction, unit: &TestFunctionPhi, axes: &[usize], x: usize, y: usize) -> Option<f64> {
    let d = block_distance(&u.geometry, axes, x, y)?;
    (d > 0.0).then(|| (u.values[x] - u.values[y]) / unit.value(d))
}

/// Direct double loop over lattice pairs: sup of (u(x) − u(y))/φ₁(d(x, y))
/// over distinct points differing only in the selected block.
pub fn brute_force_seminorm(u: &GridFunction, phi: &TestFunctionPhi, direction: Block) -> Result<f64> {
    let axes = direction_axes(&u.geometry, direction)?;
    let unit = phi.with_l(1.0)?;
    let len = u.geometry.len();
    Ok((0..len)
        .into_par_iter()
        .map(|x| (0..len).filter_map(|y| quotient(u, &unit, &axes, x, y)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max))
}

fn oracle(u: &GridFunction, phi: &TestFunctionPhi, axes: &[usize], eps: f64, l: f64) -> Result<MaxPoint> {
    let scaled = phi.with_l(l)?;
    if axes.len() == u.d() {
        locate_max(u, u, &scaled)
    } else {
        let which = if axes[0] < u.geometry.d1 { Block::One } else { Block::Two };
        partial_locate_max(u, which, &scaled, eps)
    }
}

/// Bisection over L on the sign of the doubling maximum, with locate_max (or
/// partial_locate_max, the other block frozen by a stiff penalty) as the
/// oracle. Once bracketed, the bound is refined by iterating L ← quotient of
/// the current maximizer, which ends on the exact lattice seminorm.
pub fn certify(u: &GridFunction, phi: &TestFunctionPhi, direction: Block) -> Result<Certificate> {
    let g = u.geometry;
    let axes = direction_axes(&g, direction)?;
    let unit = phi.with_l(1.0)?;
    let osc = u.max() - u.min();
    let eps = g.h() / (1e3 * (1.0 + osc)).sqrt();
    let mut cert = Certificate { l_min: 0.0, pair: None, bisection_steps: 0, refinement_steps: 0 };
    let mut step = (0.0, 0, 0);
    for x in 0..g.len() {
        for &a in &axes {
            let y = g.neighbor(x, a, 1);
            let diff = u.values[x] - u.values[y];
            if diff.abs() > step.0 {
                step = if diff > 0.0 { (diff, x, y) } else { (-diff, y, x) };
            }
        }
    }
    if step.0 == 0.0 {
        return Ok(cert);
    }
    let first = quotient(u, &unit, &axes, step.1, step.2).expect("neighbors differ in the block");
    let mut best = (first, step.1, step.2);
    let mut lo = first;
    let mut hi = osc / unit.value(g.h()) * (1.0 + 1e-9);
    let consider = |mp: &MaxPoint, best: &mut (f64, usize, usize)| {
        if let Some(q) = quotient(u, &unit, &axes, mp.x_index, mp.y_index) {
            if q > best.0 {
                *best = (q, mp.x_index, mp.y_index);
            }
        }
    };
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        let mp = oracle(u, phi, &axes, eps, mid)?;
        cert.bisection_steps += 1;
        if mp.degenerate {
            hi = mid;
        } else {
            lo = mid;
            consider(&mp, &mut best);
        }
    }
    loop {
        let mp = oracle(u, phi, &axes, eps, best.0)?;
        cert.refinement_steps += 1;
        let before = best.0;
        if !mp.degenerate {
            consider(&mp, &mut best);
        }
        if mp.degenerate || best.0 <= before {
            break;
        }
    }
    cert.l_min = best.0;
    cert.pair = Some((best.1, best.2));
    Ok(cert)
}

/// certify with the untruncated power φ(t) = L·t^α.
pub fn certify_holder(u: &GridFunction, alpha: f64, direction: Block) -> Result<Certificate> {
    certify(u, &TestFunctionPhi::holder(1.0, alpha, f64::INFINITY)?, direction)
}
