//! Direct quadrature of I¹_δ + I²_δ at a point.
//!
//! The integral is split radially: a Taylor ball of radius r0 = taylor_cells·h
//! (second-order expansion of u from lattice differences), raw differences of
//! the interpolated field up to the far radius R, and beyond R the slice mean
//! of u times the tail mass μ_x(|z| > R).

use super::{OperatorQuadrature, SplitSpec};
use crate::error::{Error, Result};
use crate::grid::{Block, GridFunction};
use crate::levy::{JumpFunction, LevyKernel};
use crate::quadrature::{AngularResolution, QuadratureConfig, Region};
use rayon::prelude::*;

/// μ_x(|z| > r).
pub fn far_mass(kernel: &LevyKernel, x: &[f64], r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    kernel.tail_mass(x, r, cfg)
}

struct Target<'a> {
    u: &'a GridFunction,
    x: &'a [f64],
    axes: Vec<usize>,
    /// Point at which the measure (and the jump) is evaluated.
    kx: Vec<f64>,
}

fn check_point(u: &GridFunction, x: &[f64]) -> Result<()> {
    if x.len() != u.d() {
        return Err(Error::GeometryMismatch(format!("point of dimension {} for a {}-dimensional field", x.len(), u.d())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("evaluation point is not finite".into()));
    }
    Ok(())
}

fn core(
    kernel: &LevyKernel,
    jump: Option<&JumpFunction>,
    t: &Target<'_>,
    split: &SplitSpec,
    oq: &OperatorQuadrature,
) -> Result<f64> {
    let k = t.axes.len();
    if kernel.dim != k {
        return Err(Error::GeometryMismatch(format!("kernel dimension {} but {} integration axes", kernel.dim, k)));
    }
    if let Some(j) = jump {
        if j.dim != k {
            return Err(Error::GeometryMismatch(format!("jump dimension {} but kernel dimension {k}", j.dim)));
        }
    }
    if !(split.delta > 0.0) {
        return Err(Error::InvalidInput(format!("split radius {} must be positive", split.delta)));
    }
    let u = t.u;
    let h = u.geometry.h();
    let mut y = t.x.to_vec();
    let u0 = u.interpolate(t.x);

    let mut at = |offsets: &[(usize, f64)]| {
        y.copy_from_slice(t.x);
        for &(a, s) in offsets {
            y[t.axes[a]] += s;
        }
        u.interpolate(&y)
    };
    let mut grad = vec![0.0; k];
    let mut hess = vec![vec![0.0; k]; k];
    for i in 0..k {
        let up = at(&[(i, h)]);
        let dn = at(&[(i, -h)]);
        grad[i] = (up - dn) / (2.0 * h);
        hess[i][i] = (up - 2.0 * u0 + dn) / (h * h);
        for l in 0..i {
            let m = (at(&[(i, h), (l, h)]) - at(&[(i, h), (l, -h)]) - at(&[(i, -h), (l, h)]) + at(&[(i, -h), (l, -h)]))
                / (4.0 * h * h);
            hess[i][l] = m;
            hess[l][i] = m;
        }
    }
    let p = match &split.gradient_override {
        Some(p) if p.len() != k => {
            return Err(Error::GeometryMismatch(format!("gradient override of length {} for kernel dimension {k}", p.len())))
        }
        Some(p) => p.clone(),
        None => grad.clone(),
    };
    let delta = split.delta;
    let mut w = vec![0.0; k];
    let jump_at = |z: &[f64], w: &mut [f64]| match jump {
        Some(j) => j.eval_into(&t.kx, z, w),
        None => w.copy_from_slice(z),
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let r0 = oq.taylor_cells * h;
    let far = oq.far_radius_for(k).max(2.0 * delta.max(1.0));
    let mut total = 0.0;

    // Taylor ball.
    let mut taylor_cuts = vec![0.0];
    if delta < r0 {
        taylor_cuts.push(delta);
    }
    taylor_cuts.push(r0);
    for win in taylor_cuts.windows(2) {
        let region = if win[0] == 0.0 { Region::ball(win[1]) } else { Region::shell(win[0], win[1]) };
        let r = kernel.integrate(&t.kx, &region, AngularResolution::Fixed(32), &oq.cfg, |z| {
            jump_at(z, &mut w);
            let mut q = 0.0;
            for i in 0..k {
                q += hess[i][i] * w[i] * w[i];
                for l in 0..i {
                    q += 2.0 * hess[i][l] * w[i] * w[l];
                }
            }
            let rz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut v = 0.5 * q;
            if rz > delta && rz <= 1.0 {
                v += dot(&grad, &w) - dot(&p, &w);
            }
            v
        })?;
        total += r.value;
    }

    // Raw differences on r0 < |z| ≤ R.
    let mut cuts = vec![r0];
    for c in [delta, 1.0] {
        if c > r0 {
            cuts.push(c);
        }
    }
    cuts.push(far);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let res = AngularResolution::ArcSpacing(oq.arc_spacing);
    let mut y = t.x.to_vec();
    for win in cuts.windows(2) {
        let r = kernel.integrate(&t.kx, &Region::shell(win[0], win[1]), res, &oq.cfg, |z| {
            jump_at(z, &mut w);
            y.copy_from_slice(t.x);
            for (i, &a) in t.axes.iter().enumerate() {
                y[a] += w[i];
            }
            let rz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let comp = if rz <= delta {
                dot(&grad, &w)
            } else if rz <= 1.0 {
                dot(&p, &w)
            } else {
                0.0
            };
            u.interpolate(&y) - u0 - comp
        })?;
        total += r.value;
    }

    // Far field.
    let mean = u.slice_mean(t.x, &t.axes);
    total += (mean - u0) * far_mass(kernel, &t.kx, far, &oq.cfg)?;
    Ok(total)
}

/// I¹_δ[x,u] + I²_δ[x,p,u] for a kernel on the whole space R^d.
pub fn eval_nonlocal(
    kernel: &LevyKernel,
    u: &GridFunction,
    x: &[f64],
    split: &SplitSpec,
    oq: &OperatorQuadrature,
) -> Result<f64> {
    check_point(u, x)?;
    let t = Target { u, x, axes: (0..u.d()).collect(), kx: x.to_vec() };
    core(kernel, None, &t, split, oq)
}

/// Lévy–Itô form: z is replaced by j(x,z) inside the integrand.
pub fn eval_levy_ito(
    jump: &JumpFunction,
    kernel: &LevyKernel,
    u: &GridFunction,
    x: &[f64],
    split: &SplitSpec,
    oq: &OperatorQuadrature,
) -> Result<f64> {
    check_point(u, x)?;
    let t = Target { u, x, axes: (0..u.d()).collect(), kx: x.to_vec() };
    core(kernel, Some(jump), &t, split, oq)
}

/// Integral over one coordinate block with the other coordinates frozen; the
/// measure depends on the block coordinates of x only.
pub fn eval_directional(
    kernel: &LevyKernel,
    u: &GridFunction,
    x: &[f64],
    which: Block,
    split: &SplitSpec,
    oq: &OperatorQuadrature,
) -> Result<f64> {
    check_point(u, x)?;
    let axes: Vec<usize> = u.geometry.axes(which).collect();
    if axes.is_empty() {
        return Err(Error::GeometryMismatch(format!("block {} is empty", which.label())));
    }
    let kx = axes.iter().map(|&a| x[a]).collect();
    let t = Target { u, x, axes, kx };
    core(kernel, None, &t, split, oq)
}

/// eval_directional (or eval_nonlocal for the full block) at every lattice
/// point.
pub fn apply_nonlocal(
    kernel: &LevyKernel,
    u: &GridFunction,
    which: Block,
    split: &SplitSpec,
    oq: &OperatorQuadrature,
) -> Result<GridFunction> {
    let g = u.geometry;
    let values = (0..g.len())
        .into_par_iter()
        .map(|i| eval_directional(kernel, u, &g.coords(i), which, split, oq))
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Geometry;
    use std::f64::consts::PI;

    fn cos1(n: usize) -> GridFunction {
        GridFunction::from_fn(Geometry::new(1, 0, n).unwrap(), |x| (2.0 * PI * x[0]).cos())
    }

    #[test]
    fn cosine_symbol_beta_one() {
        let k = LevyKernel::fractional(1, 1.0).unwrap();
        let u = cos1(512);
        let oq = OperatorQuadrature::default();
        let v = eval_nonlocal(&k, &u, &[0.0], &SplitSpec::default(), &oq).unwrap();
        assert!((v + 2.0 * PI * PI).abs() < 1e-3 * 2.0 * PI * PI, "{v}");
        let v = eval_nonlocal(&k, &u, &[0.25], &SplitSpec::default(), &oq).unwrap();
        assert!(v.abs() < 1e-3, "{v}");
    }

    #[test]
    fn constant_field_vanishes() {
        let g = Geometry::new(2, 0, 16).unwrap();
        let u = GridFunction::constant(g, 2.5);
        let k = LevyKernel::fractional(2, 1.5).unwrap();
        let v = eval_nonlocal(&k, &u, &[0.3, 0.1], &SplitSpec::default(), &OperatorQuadrature::default()).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
    }

    #[test]
    fn scaled_jump_halves_beta_one() {
        let k = LevyKernel::fractional(1, 1.0).unwrap();
        let u = cos1(512);
        let j = JumpFunction::new(1, crate::levy::JumpMap::Scaled(0.5), 0.5, 0.5, 1.0, 0.0).unwrap();
        let v = eval_levy_ito(&j, &k, &u, &[0.0], &SplitSpec::default(), &OperatorQuadrature::default()).unwrap();
        assert!((v + PI * PI).abs() < 2e-3 * PI * PI, "{v}");
    }

    #[test]
    fn directional_blocks() {
        let g = Geometry::new(1, 1, 256).unwrap();
        let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
        let k = LevyKernel::fractional(1, 1.0).unwrap();
        let oq = OperatorQuadrature::default();
        let s = SplitSpec::default();
        let v = eval_directional(&k, &u, &[0.0, 0.0], Block::Two, &s, &oq).unwrap();
        assert!((v + 2.0 * PI * PI).abs() < 2e-3 * 2.0 * PI * PI, "{v}");
        let v = eval_directional(&k, &u, &[0.25, 0.0], Block::Two, &s, &oq).unwrap();
        assert!(v.abs() < 1e-3, "{v}");
        let w = GridFunction::from_fn(g, |x| (2.0 * PI * x[1]).cos());
        let v = eval_directional(&k, &w, &[0.3, 0.7], Block::One, &s, &oq).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
    }
}
