//! Doubling of variables: maximum points of u(x) − v(y) − Φ(x − y) on the
//! lattice and the cone geometry attached to a = x̄ − ȳ.

use super::phi::TestFunctionPhi;
use crate::error::{Error, Result};
use crate::grid::{wrap_half, Block, Geometry, GridFunction};
use rayon::prelude::*;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingGeometry {
    pub a: Vec<f64>,
    pub eta: f64,
    pub delta0: f64,
    /// (1 − η − δ0)/(1 + δ0).
    pub eta_tilde: f64,
    /// |a|·δ0.
    pub delta: f64,
}

impl DoublingGeometry {
    pub fn new(a: Vec<f64>, eta: f64, delta0: f64) -> Result<DoublingGeometry> {
        let n = norm(&a);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("a = x - y must be a nonzero vector".into()));
        }
        if !(eta > 0.0 && eta < 1.0) || !(delta0 > 0.0 && delta0 < 1.0) {
            return Err(Error::InvalidInput(format!("eta = {eta}, delta0 = {delta0} must lie in (0, 1)")));
        }
        if 1.0 - eta - delta0 <= 0.0 {
            return Err(Error::InvalidInput(format!("1 - eta - delta0 = {} must be positive", 1.0 - eta - delta0)));
        }
        Ok(DoublingGeometry { eta_tilde: (1.0 - eta - delta0) / (1.0 + delta0), delta: n * delta0, a, eta, delta0 })
    }

    pub fn norm_a(&self) -> f64 {
        norm(&self.a)
    }

    /// â.
    pub fn unit(&self) -> Vec<f64> {
        let n = self.norm_a();
        self.a.iter().map(|v| v / n).collect()
    }
}

/// A lattice maximizer (x̄, ȳ) of a doubling function.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPoint {
    pub x_index: usize,
    pub y_index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Minimal-image x̄ − ȳ.
    pub a: Vec<f64>,
    pub value: f64,
    /// M ≤ 0 or x̄ = ȳ in the regularized coordinates.
    pub degenerate: bool,
    /// Penalty |x_o − ȳ_o|²/ε² at the maximizer (0 when unpenalized).
    pub penalization_gap: f64,
}

impl MaxPoint {
    pub fn norm_a(&self) -> f64 {
        norm(&self.a)
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.degenerate {
            return Err(Error::Degenerate(format!(
                "maximum {} at x = {:?}, y = {:?} is not positive with distinct points",
                self.value, self.x, self.y
            )));
        }
        Ok(())
    }
}

/// Minimal-image vectors of every lattice offset, indexed like the lattice.
fn offsets(g: &Geometry) -> Vec<Vec<f64>> {
    let h = g.h();
    (0..g.len())
        .map(|k| {
            let idx = g.unravel(k);
            (0..g.d()).map(|a| wrap_half(idx[a] as f64 * h)).collect()
        })
        .collect()
}

/// max over x and lattice offsets k of u(x) − v(x − k) − penalty[k]; ties go
/// to the smallest (x, k).
fn scan(u: &GridFunction, v: &GridFunction, penalty: &[f64]) -> (f64, usize, usize) {
    let g = u.geometry;
    let n = g.n;
    let d = g.d();
    let best: Vec<(f64, usize, usize)> = (0..g.len())
        .into_par_iter()
        .map(|xi| {
            let ix = g.unravel(xi);
            let ux = u.values[xi];
            let mut top = (f64::NEG_INFINITY, xi, 0);
            let mut iy = [0usize; 3];
            for (k, pk) in penalty.iter().enumerate() {
                let ik = g.unravel(k);
                for a in 0..d {
                    iy[a] = (ix[a] + n - ik[a]) % n;
                }
                let val = ux - v.values[g.ravel(&iy[..d])] - pk;
                if val > top.0 {
                    top = (val, xi, k);
                }
            }
            top
        })
        .collect();
    best.into_iter().fold((f64::NEG_INFINITY, 0, 0), |acc, b| if b.0 > acc.0 { b } else { acc })
}

fn build(u: &GridFunction, (value, xi, k): (f64, usize, usize), offs: &[Vec<f64>], regular: &[usize], gap: f64) -> MaxPoint {
    let g = u.geometry;
    let n = g.n;
    let ix = g.unravel(xi);
    let ik = g.unravel(k);
    let iy: Vec<usize> = (0..g.d()).map(|a| (ix[a] + n - ik[a]) % n).collect();
    let yi = g.ravel(&iy);
    let a = offs[k].clone();
    let regular_zero = regular.iter().all(|&ax| a[ax] == 0.0);
    MaxPoint {
        x_index: xi,
        y_index: yi,
        x: g.coords(xi),
        y: g.coords(yi),
        a,
        value,
        degenerate: value <= 0.0 || regular_zero,
        penalization_gap: gap,
    }
}

/// Exhaustive lattice maximization of u(x) − v(y) − φ(|x − y|) with the torus
/// metric.
pub fn locate_max(u: &GridFunction, v: &GridFunction, phi: &TestFunctionPhi) -> Result<MaxPoint> {
    u.same_geometry(v)?;
    let offs = offsets(&u.geometry);
    let penalty: Vec<f64> = offs.iter().map(|o| phi.value(norm(o))).collect();
    let best = scan(u, v, &penalty);
    let all: Vec<usize> = (0..u.d()).collect();
    Ok(build(u, best, &offs, &all, 0.0))
}

/// max over lattice pairs with 0 < |x − y| < t0 of (u(x) − v(y))/φ(|x − y|):
/// the smallest scale factor of φ for which the doubling maximum is not
/// attained at such pairs.
pub fn phi_seminorm(u: &GridFunction, v: &GridFunction, phi: &TestFunctionPhi) -> Result<f64> {
    u.same_geometry(v)?;
    let offs = offsets(&u.geometry);
    let penalty: Vec<f64> = offs
        .iter()
        .map(|o| {
            let t = norm(o);
            if t > 0.0 && t < phi.t0 {
                phi.value(t)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let g = u.geometry;
    let n = g.n;
    let d = g.d();
    let best = (0..g.len())
        .into_par_iter()
        .map(|xi| {
            let ix = g.unravel(xi);
            let mut iy = [0usize; 3];
            let mut top = f64::NEG_INFINITY;
            for (k, pk) in penalty.iter().enumerate() {
                if !pk.is_finite() {
                    continue;
                }
                let ik = g.unravel(k);
                for a in 0..d {
                    iy[a] = (ix[a] + n - ik[a]) % n;
                }
                top = top.max((u.values[xi] - v.values[g.ravel(&iy[..d])]) / pk);
            }
            top
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// Maximizes u(x) − v(y) − |x − y|²/ε² (quadratic doubling).
pub fn locate_max_quadratic(u: &GridFunction, v: &GridFunction, eps: f64) -> Result<MaxPoint> {
    u.same_geometry(v)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    let offs = offsets(&u.geometry);
    let penalty: Vec<f64> = offs.iter().map(|o| o.iter().map(|t| t * t).sum::<f64>() / (eps * eps)).collect();
    let best = scan(u, v, &penalty);
    let all: Vec<usize> = (0..u.d()).collect();
    Ok(build(u, best, &offs, &all, 0.0))
}

/// Maximizes u(x) − u(y) − φ(|x_w − y_w|) − |x_o − y_o|²/ε², with w the
/// regularized block and o the other one.
pub fn partial_locate_max(u: &GridFunction, which: Block, phi: &TestFunctionPhi, eps: f64) -> Result<MaxPoint> {
    let g = u.geometry;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    let regular: Vec<usize> = match which {
        Block::One | Block::Two => g.axes(which).collect(),
        Block::Full => return Err(Error::InvalidInput("partial maximization needs block 1 or 2".into())),
    };
    if regular.is_empty() || regular.len() == g.d() {
        return Err(Error::GeometryMismatch(format!("block {} must be a proper nonempty block", which.label())));
    }
    let other: Vec<usize> = (0..g.d()).filter(|a| !regular.contains(a)).collect();
    let offs = offsets(&g);
    let split = |o: &[f64]| {
        let w = regular.iter().map(|&a| o[a] * o[a]).sum::<f64>().sqrt();
        let q = other.iter().map(|&a| o[a] * o[a]).sum::<f64>() / (eps * eps);
        (w, q)
    };
    let penalty: Vec<f64> = offs
        .iter()
        .map(|o| {
            let (w, q) = split(o);
            phi.value(w) + q
        })
        .collect();
    let best = scan(u, u, &penalty);
    let gap = split(&offs[best.2]).1;
    Ok(build(u, best, &offs, &regular, gap))
}
