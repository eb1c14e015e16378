//! Both sides of the concave estimates, for general kernels and for
//! Lévy–Itô operators, at a located maximum point.

use super::doubling::{DoublingGeometry, MaxPoint};
use super::phi::TestFunctionPhi;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::levy::{JumpFunction, LevyKernel, SupportCone};
use crate::operators::{eval_levy_ito, eval_nonlocal, OperatorQuadrature, SplitSpec};
use crate::quadrature::{AngularResolution, QuadratureConfig, Region};

/// Points of the s-grid on [−1, 1].
pub const S_GRID_POINTS: usize = 33;

/// s_k = −1 + k/16, k = 0..=32.
pub fn s_grid() -> [f64; S_GRID_POINTS] {
    let mut s = [0.0; S_GRID_POINTS];
    for (k, v) in s.iter_mut().enumerate() {
        *v = -1.0 + k as f64 / 16.0;
    }
    s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Left and right sides of an estimate with the named rhs terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSides {
    pub lhs: f64,
    pub rhs: f64,
    pub terms: Vec<(String, f64)>,
    pub s_grid: usize,
}

impl EstimateSides {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// lhs ≤ rhs + 1e−6·(1 + |rhs|).
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-6 * (1.0 + self.rhs.abs())
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// C̃_μ over a coarse lattice of 4 points per axis plus the given points.
pub fn m1_sup(kernel: &LevyKernel, extra: &[&[f64]], cfg: &QuadratureConfig) -> Result<f64> {
    if kernel.is_x_independent() {
        return kernel.m1_constant(&[], cfg);
    }
    let d = kernel.dim;
    let mut points: Vec<Vec<f64>> = (0..4usize.pow(d as u32))
        .map(|mut i| {
            (0..d)
                .map(|_| {
                    let c = (i % 4) as f64 / 4.0;
                    i /= 4;
                    c
                })
                .collect()
        })
        .collect();
    points.extend(extra.iter().map(|p| p.to_vec()));
    kernel.m1_constant(&points, cfg)
}

/// Split radius used for the direct left-hand side: small enough that the
/// compensator p acts on the whole unit ball.
fn lhs_split(u: &GridFunction, p: Vec<f64>) -> Result<SplitSpec> {
    Ok(SplitSpec::new(0.5 * u.geometry.h())?.with_gradient(p))
}

fn check_pair(u: &GridFunction, v: &GridFunction, mp: &MaxPoint, geom: &DoublingGeometry, dim: usize) -> Result<()> {
    u.same_geometry(v)?;
    if dim != u.d() {
        return Err(Error::GeometryMismatch(format!("kernel dimension {dim} for a {}-dimensional field", u.d())));
    }
    mp.require_nondegenerate()?;
    if geom.a.len() != mp.a.len() || geom.a.iter().zip(&mp.a).any(|(p, q)| (p - q).abs() > 1e-12) {
        return Err(Error::InvalidInput("doubling geometry does not match the maximum point".into()));
    }
    Ok(())
}

/// sup over the s-grid of (1 − η̃²)φ′(t)/t + η̃²φ″(t), t = |a + s·w|.
fn cone_weight(phi: &TestFunctionPhi, a: &[f64], w: &[f64], eta_tilde: f64, buf: &mut [f64]) -> f64 {
    let e2 = eta_tilde * eta_tilde;
    s_grid()
        .iter()
        .map(|&s| {
            for ((b, ai), wi) in buf.iter_mut().zip(a).zip(w) {
                *b = ai + s * wi;
            }
            let t = norm(buf);
            (1.0 - e2) * phi.d1(t) / t + e2 * phi.d2(t)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// sup over the s-grid of φ′(t)/t, t = |a + s·w|.
fn ratio_weight(phi: &TestFunctionPhi, a: &[f64], w: &[f64], buf: &mut [f64]) -> f64 {
    s_grid()
        .iter()
        .map(|&s| {
            for ((b, ai), wi) in buf.iter_mut().zip(a).zip(w) {
                *b = ai + s * wi;
            }
            let t = norm(buf);
            phi.d1(t) / t
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// lhs = I[x̄,p,u] − I[ȳ,p,v] with p = φ′(|a|)â, and the four-term bound
/// 4C̃_μ·max‖·‖ + cone term + ring term + off-cone term.
pub fn concave_estimate_sides(
    kernel: &LevyKernel,
    u: &GridFunction,
    v: &GridFunction,
    phi: &TestFunctionPhi,
    geom: &DoublingGeometry,
    mp: &MaxPoint,
    oq: &OperatorQuadrature,
) -> Result<EstimateSides> {
    check_pair(u, v, mp, geom, kernel.dim)?;
    let cfg = &oq.cfg;
    let a = &geom.a;
    let na = geom.norm_a();
    let unit = geom.unit();
    let p: Vec<f64> = unit.iter().map(|e| phi.d1(na) * e).collect();
    let split = lhs_split(u, p)?;
    let lhs = eval_nonlocal(kernel, u, &mp.x, &split, oq)? - eval_nonlocal(kernel, v, &mp.y, &split, oq)?;

    let c_tilde = m1_sup(kernel, &[&mp.x, &mp.y], cfg)?;
    let t1 = 4.0 * c_tilde * u.sup_norm().max(v.sup_norm());

    let res = AngularResolution::Fixed(64);
    let cos_min = 1.0 - geom.eta;
    let mut buf = vec![0.0; a.len()];
    let t2 = match kernel.support_cone(&unit, cos_min, false) {
        SupportCone::Empty => 0.0,
        SupportCone::Region(ang) => {
            let region = Region::ball(geom.delta).with_angular(ang);
            let mut sum = 0.0;
            for x in [&mp.x, &mp.y] {
                sum += kernel
                    .integrate(x, &region, res, cfg, |z| cone_weight(phi, a, z, geom.eta_tilde, &mut buf) * dot(z, z))?
                    .value;
            }
            0.5 * sum
        }
    };

    let t3 = 2.0
        * phi.d1(na)
        * kernel.integrate_abs_difference(&mp.x, &mp.y, &Region::shell(geom.delta, 1.0), res, cfg, norm)?.value;
    let t4 = match kernel.support_cone(&unit, cos_min, true) {
        SupportCone::Empty => 0.0,
        SupportCone::Region(ang) => {
            let region = Region::ball(geom.delta).with_angular(ang);
            kernel
                .integrate_abs_difference(&mp.x, &mp.y, &region, res, cfg, |z| ratio_weight(phi, a, z, &mut buf) * dot(z, z))?
                .value
        }
    };
    Ok(EstimateSides {
        lhs,
        rhs: t1 + t2 + t3 + t4,
        terms: vec![("tail".into(), t1), ("cone".into(), t2), ("ring".into(), t3), ("off_cone".into(), t4)],
        s_grid: S_GRID_POINTS,
    })
}

/// Midpoint ȳ + a/2 of the maximum point.
fn midpoint(mp: &MaxPoint) -> Vec<f64> {
    mp.y.iter().zip(&mp.a).map(|(y, a)| y + 0.5 * a).collect()
}

/// z in C_{η,δ}(x): |j(x,z)| ≤ δ and (1 − η)|j(x,z)| ≤ |â·j(x,z)|.
fn in_jump_cone(jump: &JumpFunction, x: &[f64], z: &[f64], unit: &[f64], eta: f64, delta: f64, w: &mut [f64]) -> bool {
    jump.eval_into(x, z, w);
    let r = norm(w);
    r <= delta && (1.0 - eta) * r <= dot(unit, w).abs()
}

/// The middle cone {|j(m,z)| ≤ δ/2, |â·j(m,z)| ≥ (1 − η/2)|j(m,z)|}, m the
/// midpoint.
fn in_middle_cone(jump: &JumpFunction, m: &[f64], z: &[f64], unit: &[f64], geom: &DoublingGeometry, w: &mut [f64]) -> bool {
    in_jump_cone(jump, m, z, unit, 0.5 * geom.eta, 0.5 * geom.delta, w)
}

/// Result of sampling the middle cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeInclusion {
    pub sampled: usize,
    pub inside: usize,
    pub violations: usize,
}

/// Samples z on a polar grid of B_{δ/(2c0)} and counts points of the middle
/// cone that miss C_{η,δ}(x̄) ∩ C_{η,δ}(ȳ).
pub fn middle_cone_inclusion(jump: &JumpFunction, geom: &DoublingGeometry, mp: &MaxPoint, radial: usize) -> Result<ConeInclusion> {
    let d = jump.dim;
    if d != mp.a.len() || !(1..=2).contains(&d) {
        return Err(Error::Unsupported(format!("cone sampling in dimension {d}")));
    }
    let m = midpoint(mp);
    let unit = geom.unit();
    let r_max = 0.5 * geom.delta / jump.c0;
    let mut w = vec![0.0; d];
    let mut out = ConeInclusion { sampled: 0, inside: 0, violations: 0 };
    let angles: Vec<Vec<f64>> = match d {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..4 * radial)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / (4 * radial) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
    };
    for i in 1..=radial {
        let r = r_max * i as f64 / radial as f64;
        for dir in &angles {
            let z: Vec<f64> = dir.iter().map(|c| r * c).collect();
            out.sampled += 1;
            if !in_middle_cone(jump, &m, &z, &unit, geom, &mut w) {
                continue;
            }
            out.inside += 1;
            let ok = in_jump_cone(jump, &mp.x, &z, &unit, geom.eta, geom.delta, &mut w)
                && in_jump_cone(jump, &mp.y, &z, &unit, geom.eta, geom.delta, &mut w);
            if !ok {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

/// Lévy–Itô version: lhs = J[x̄,p,u] − J[ȳ,p,v]; the cone term runs over the
/// middle cone and the remaining terms over the jump differences
/// Δ(z) = j(x̄,z) − j(ȳ,z).
#[allow(clippy::too_many_arguments)]
pub fn levy_ito_concave_sides(
    jump: &JumpFunction,
    kernel: &LevyKernel,
    u: &GridFunction,
    v: &GridFunction,
    phi: &TestFunctionPhi,
    geom: &DoublingGeometry,
    mp: &MaxPoint,
    oq: &OperatorQuadrature,
) -> Result<EstimateSides> {
    check_pair(u, v, mp, geom, kernel.dim)?;
    if jump.dim != kernel.dim {
        return Err(Error::GeometryMismatch("jump and kernel dimensions differ".into()));
    }
    if !kernel.is_x_independent() {
        return Err(Error::Unsupported("Lévy–Itô estimates with an x-dependent measure".into()));
    }
    let na = geom.norm_a();
    let lhs_small = (0.5 * na).powf(jump.gamma);
    let rhs_small = jump.c0 / jump.big_c0 * geom.eta / (4.0 - geom.eta);
    if lhs_small > rhs_small {
        return Err(Error::InvalidInput(format!(
            "smallness condition fails: (|a|/2)^gamma = {lhs_small} > (c0/C0) eta/(4 - eta) = {rhs_small}"
        )));
    }
    let cfg = &oq.cfg;
    let a = &geom.a;
    let unit = geom.unit();
    let d = kernel.dim;
    let p: Vec<f64> = unit.iter().map(|e| phi.d1(na) * e).collect();
    let split = lhs_split(u, p)?;
    let lhs = eval_levy_ito(jump, kernel, u, &mp.x, &split, oq)? - eval_levy_ito(jump, kernel, v, &mp.y, &split, oq)?;

    let origin = vec![0.0; d];
    let c_tilde = kernel.m1_constant(&[], cfg)?;
    let t1 = 4.0 * c_tilde * u.sup_norm().max(v.sup_norm());

    let m = midpoint(mp);
    let res = AngularResolution::Fixed(64);
    let mut w = vec![0.0; d];
    let mut wx = vec![0.0; d];
    let mut buf = vec![0.0; d];
    let r_cone = (0.5 * geom.delta / jump.c0).min(1.0);
    let t2 = 0.5
        * kernel
            .integrate(&origin, &Region::ball(r_cone), res, cfg, |z| {
                if !in_middle_cone(jump, &m, z, &unit, geom, &mut w) {
                    return 0.0;
                }
                let mut s = 0.0;
                for x in [&mp.x, &mp.y] {
                    jump.eval_into(x, z, &mut wx);
                    s += cone_weight(phi, a, &wx, geom.eta_tilde, &mut buf) * dot(&wx, &wx);
                }
                s
            })?
            .value;

    let dphi = phi.d1(na);
    let mut ring = 0.0;
    let mut off = 0.0;
    let mut cuts = vec![0.0, r_cone, 1.0];
    cuts.dedup();
    let mut wy = vec![0.0; d];
    for win in cuts.windows(2) {
        let region = if win[0] == 0.0 { Region::ball(win[1]) } else { Region::shell(win[0], win[1]) };
        let mut delta_vec = vec![0.0; d];
        let mut split_terms = |z: &[f64], far: bool| -> f64 {
            if in_middle_cone(jump, &m, z, &unit, geom, &mut w) {
                return 0.0;
            }
            jump.eval_into(&mp.x, z, &mut wx);
            jump.eval_into(&mp.y, z, &mut wy);
            for k in 0..d {
                delta_vec[k] = wx[k] - wy[k];
            }
            let nd = norm(&delta_vec);
            if nd == 0.0 {
                return 0.0;
            }
            if (nd >= geom.delta) == far {
                if far {
                    2.0 * dphi * nd
                } else {
                    ratio_weight(phi, a, &delta_vec, &mut buf) * nd * nd
                }
            } else {
                0.0
            }
        };
        ring += kernel.integrate(&origin, &region, AngularResolution::ArcSpacing(oq.arc_spacing), cfg, |z| split_terms(z, true))?.value;
        off += kernel.integrate(&origin, &region, AngularResolution::ArcSpacing(oq.arc_spacing), cfg, |z| split_terms(z, false))?.value;
    }
    Ok(EstimateSides {
        lhs,
        rhs: t1 + t2 + ring + off,
        terms: vec![("tail".into(), t1), ("cone".into(), t2), ("ring".into(), ring), ("off_cone".into(), off)],
        s_grid: S_GRID_POINTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_grid_contains_endpoints_and_zero() {
        let s = s_grid();
        assert_eq!(s[0], -1.0);
        assert_eq!(s[16], 0.0);
        assert_eq!(s[32], 1.0);
    }

    #[test]
    fn m1_of_beta_one() {
        let k = LevyKernel::fractional(1, 1.0).unwrap();
        let c = m1_sup(&k, &[], &QuadratureConfig::default()).unwrap();
        assert!((c - 4.0).abs() < 1e-9, "{c}");
    }
}
