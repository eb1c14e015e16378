//! Radial-angular product quadrature in dimensions 1 to 3.
//!
//! Regions are radial shells intersected with a full sphere, a double cone
//! around an axis, or the complement of such a cone. Shells touching the
//! origin or extending to infinity are split into dyadic cells (ratio 2);
//! the cell sums are accumulated until they become negligible, with a
//! geometric tail extrapolation once consecutive cell ratios settle.

use crate::error::{Error, Result};

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

impl GaussRule {
    /// Composite rule on [a, b] with `pieces` equal subintervals.
    pub fn composite(&self, a: f64, b: f64, pieces: usize, out: &mut Vec<(f64, f64)>) {
        let pieces = pieces.max(1);
        let len = (b - a) / pieces as f64;
        for p in 0..pieces {
            let lo = a + len * p as f64;
            let half = 0.5 * len;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
    }

    /// Integral of `f` over [a, b] with `pieces` subintervals.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, pieces: usize, mut f: F) -> f64 {
        let mut pts = Vec::with_capacity(self.nodes.len() * pieces.max(1));
        self.composite(a, b, pieces, &mut pts);
        let mut s = 0.0;
        for (x, w) in pts {
            s += w * f(x);
        }
        s
    }
}

/// Angular part of an integration region.
#[derive(Debug, Clone, PartialEq)]
pub enum Angular {
    Full,
    /// Double cone {ω : |axis·ω| ≥ cos_min}.
    Cone { axis: Vec<f64>, cos_min: f64 },
    /// Complement {ω : |axis·ω| < cos_min}.
    ConeComplement { axis: Vec<f64>, cos_min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub r_lo: f64,
    pub r_hi: f64,
    pub angular: Angular,
}

impl Region {
    pub fn ball(r: f64) -> Self {
        Region { r_lo: 0.0, r_hi: r, angular: Angular::Full }
    }
    pub fn shell(r_lo: f64, r_hi: f64) -> Self {
        Region { r_lo, r_hi, angular: Angular::Full }
    }
    pub fn exterior(r: f64) -> Self {
        Region { r_lo: r, r_hi: f64::INFINITY, angular: Angular::Full }
    }
    pub fn with_angular(mut self, angular: Angular) -> Self {
        self.angular = angular;
        self
    }
}

/// Number of angular nodes on a great circle of radius r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularResolution {
    Fixed(usize),
    /// Target arc length between neighbouring nodes.
    ArcSpacing(f64),
}

#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub order: usize,
    pub panel_length: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Relative error above which an unconverged series is a failure.
    pub fail_tol: f64,
    pub max_cells: usize,
    pub min_angular: usize,
    pub max_angular: usize,
    rule: GaussRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::new(8)
    }
}

impl QuadratureConfig {
    pub fn new(order: usize) -> Self {
        QuadratureConfig {
            order,
            panel_length: 0.25,
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            fail_tol: 1e-6,
            max_cells: 1500,
            min_angular: 16,
            max_angular: 8192,
            rule: gauss_legendre(order),
        }
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Orthonormal vectors completing `a` (unit, dim 3) to a frame.
fn frame3(a: &[f64]) -> ([f64; 3], [f64; 3]) {
    let pick = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = pick[0] * a[0] + pick[1] * a[1] + pick[2] * a[2];
    let mut e1 = [pick[0] - d * a[0], pick[1] - d * a[1], pick[2] - d * a[2]];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in e1.iter_mut() {
        *c /= n;
    }
    let e2 = [
        a[1] * e1[2] - a[2] * e1[1],
        a[2] * e1[0] - a[0] * e1[2],
        a[0] * e1[1] - a[1] * e1[0],
    ];
    (e1, e2)
}

/// Unit directions and weights (summing to the angular measure) at radius r.
fn angular_nodes(
    dim: usize,
    angular: &Angular,
    r: f64,
    res: AngularResolution,
    cfg: &QuadratureConfig,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let circle_count = |len: f64| -> usize {
        let c = match res {
            AngularResolution::Fixed(n) => (n as f64 * len / (2.0 * std::f64::consts::PI)).ceil() as usize,
            AngularResolution::ArcSpacing(s) => (len * r / s).ceil() as usize,
        };
        c.clamp(cfg.min_angular, cfg.max_angular)
    };
    let (axis, cos_min, cone) = match angular {
        Angular::Full => (None, 0.0, None),
        Angular::Cone { axis, cos_min } => (Some(normalized(axis)), *cos_min, Some(true)),
        Angular::ConeComplement { axis, cos_min } => (Some(normalized(axis)), *cos_min, Some(false)),
    };
    if let Some(a) = &axis {
        if a.len() != dim {
            return Err(Error::InvalidInput(format!("axis has dimension {} but region has {}", a.len(), dim)));
        }
    }
    let mut out = Vec::new();
    match dim {
        1 => {
            let inside = match cone {
                None => true,
                Some(true) => cos_min <= 1.0,
                Some(false) => cos_min > 1.0,
            };
            if inside {
                out.push((vec![1.0], 1.0));
                out.push((vec![-1.0], 1.0));
            }
        }
        2 => {
            let tau = 2.0 * std::f64::consts::PI;
            match cone {
                None => {
                    let n = circle_count(tau);
                    for k in 0..n {
                        let t = tau * k as f64 / n as f64;
                        out.push((vec![t.cos(), t.sin()], tau / n as f64));
                    }
                }
                Some(is_cone) => {
                    let a = axis.unwrap();
                    let ta = a[1].atan2(a[0]);
                    let th0 = cos_min.clamp(-1.0, 1.0).acos();
                    let pi = std::f64::consts::PI;
                    let arcs: Vec<(f64, f64)> = if is_cone {
                        vec![(ta - th0, ta + th0), (ta + pi - th0, ta + pi + th0)]
                    } else {
                        vec![(ta + th0, ta + pi - th0), (ta + pi + th0, ta + tau - th0)]
                    };
                    let mut pts = Vec::new();
                    for (lo, hi) in arcs {
                        if hi - lo <= 0.0 {
                            continue;
                        }
                        let pieces = (circle_count(hi - lo) + cfg.order - 1) / cfg.order;
                        cfg.rule.composite(lo, hi, pieces, &mut pts);
                    }
                    for (t, w) in pts {
                        out.push((vec![t.cos(), t.sin()], w));
                    }
                }
            }
        }
        3 => {
            let tau = 2.0 * std::f64::consts::PI;
            let a = axis.unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
            let (e1, e2) = frame3(&a);
            let c = cos_min.clamp(0.0, 1.0);
            let bands: Vec<(f64, f64)> = match cone {
                None => vec![(-1.0, 1.0)],
                Some(true) => vec![(-1.0, -c), (c, 1.0)],
                Some(false) => vec![(-c, c)],
            };
            let nphi = circle_count(tau);
            let mut ts = Vec::new();
            for (lo, hi) in bands {
                if hi - lo <= 0.0 {
                    continue;
                }
                let len = (hi - lo) * std::f64::consts::FRAC_PI_2;
                let pieces = (circle_count(len) + cfg.order - 1) / cfg.order;
                cfg.rule.composite(lo, hi, pieces, &mut ts);
            }
            for (t, wt) in ts {
                let s = (1.0 - t * t).max(0.0).sqrt();
                for k in 0..nphi {
                    let p = tau * (k as f64 + 0.5) / nphi as f64;
                    let (cp, sp) = (p.cos(), p.sin());
                    let w = vec![
                        s * (cp * e1[0] + sp * e2[0]) + t * a[0],
                        s * (cp * e1[1] + sp * e2[1]) + t * a[1],
                        s * (cp * e1[2] + sp * e2[2]) + t * a[2],
                    ];
                    out.push((w, wt * tau / nphi as f64));
                }
            }
        }
        _ => return Err(Error::Unsupported(format!("quadrature in dimension {dim}"))),
    }
    Ok(out)
}

/// Integral over the shell r_a < |z| ≤ r_b, split into panels.
fn shell(
    dim: usize,
    angular: &Angular,
    r_a: f64,
    r_b: f64,
    res: AngularResolution,
    cfg: &QuadratureConfig,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> Result<f64> {
    let pieces = ((r_b - r_a) / cfg.panel_length).ceil().max(1.0) as usize;
    let len = (r_b - r_a) / pieces as f64;
    let mut total = 0.0;
    let mut z = vec![0.0; dim];
    for p in 0..pieces {
        let lo = r_a + len * p as f64;
        let hi = lo + len;
        let dirs = angular_nodes(dim, angular, hi, res, cfg)?;
        if dirs.is_empty() {
            return Ok(0.0);
        }
        let half = 0.5 * len;
        let mid = lo + half;
        let mut panel = 0.0;
        for (x, w) in cfg.rule.nodes.iter().zip(&cfg.rule.weights) {
            let r = mid + half * x;
            let jac = r.powi(dim as i32 - 1);
            let mut ang = 0.0;
            for (omega, wa) in &dirs {
                for k in 0..dim {
                    z[k] = r * omega[k];
                }
                ang += wa * f(&z);
            }
            panel += w * half * jac * ang;
        }
        total += panel;
    }
    Ok(total)
}

/// Sum of a sequence of dyadic cells with tail extrapolation.
fn dyadic_series<C: FnMut(usize) -> Result<Option<f64>>>(
    cfg: &QuadratureConfig,
    context: &str,
    mut cell: C,
) -> Result<Integral> {
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_q: Option<f64> = None;
    let mut stable = 0usize;
    let mut last: f64 = 0.0;
    for k in 0..cfg.max_cells {
        let c = match cell(k)? {
            Some(c) => c,
            None => {
                return Ok(Integral { value: sum, error: last.abs(), cells: k });
            }
        };
        sum += c;
        last = c;
        if k >= 5 {
            let scale = sum.abs().max(cfg.abs_tol);
            if c == 0.0 && prev == Some(0.0) && sum == 0.0 {
                return Ok(Integral { value: 0.0, error: 0.0, cells: k + 1 });
            }
            if let Some(p) = prev {
                if p != 0.0 {
                    let q = c / p;
                    if q > 0.0 && q < 1.0 {
                        let tail = c * q / (1.0 - q);
                        if tail.abs() <= cfg.rel_tol * scale {
                            return Ok(Integral { value: sum + tail, error: tail.abs() * 1e-3, cells: k + 1 });
                        }
                        if let Some(pq) = prev_q {
                            if (q - pq).abs() <= 1e-9 * q {
                                stable += 1;
                            } else {
                                stable = 0;
                            }
                            if stable >= 3 {
                                let err = tail.abs() * ((q - pq).abs() / (1.0 - q)).max(1e-12);
                                return Ok(Integral { value: sum + tail, error: err, cells: k + 1 });
                            }
                        }
                        prev_q = Some(q);
                    } else if c.abs() <= cfg.rel_tol * scale * 1e-2 {
                        return Ok(Integral { value: sum, error: c.abs(), cells: k + 1 });
                    } else {
                        prev_q = None;
                        stable = 0;
                    }
                }
            }
        }
        prev = Some(c);
    }
    let err = last.abs() * cfg.max_cells as f64;
    if err <= cfg.fail_tol * sum.abs() {
        Ok(Integral { value: sum, error: err, cells: cfg.max_cells })
    } else {
        Err(Error::QuadratureFailure {
            context: context.to_string(),
            estimated_error: err,
            tolerance: cfg.fail_tol * sum.abs(),
        })
    }
}

/// Integral of `f` over `region` in R^dim (dim ≤ 3).
///
/// `f` receives the point z and must already include any density factor.
pub fn integrate<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    region: &Region,
    res: AngularResolution,
    cfg: &QuadratureConfig,
    mut f: F,
) -> Result<Integral> {
    integrate_dyn(dim, region, res, cfg, &mut f)
}

fn integrate_dyn(
    dim: usize,
    region: &Region,
    res: AngularResolution,
    cfg: &QuadratureConfig,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> Result<Integral> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Unsupported(format!("quadrature in dimension {dim}")));
    }
    let (lo, hi) = (region.r_lo, region.r_hi);
    if lo < 0.0 || hi.is_nan() || lo.is_nan() {
        return Err(Error::InvalidInput(format!("bad radial range [{lo}, {hi}]")));
    }
    if hi <= lo {
        return Ok(Integral { value: 0.0, error: 0.0, cells: 0 });
    }
    if lo == 0.0 && hi.is_infinite() {
        let inner = integrate_dyn(dim, &Region { r_lo: 0.0, r_hi: 1.0, angular: region.angular.clone() }, res, cfg, f)?;
        let outer = integrate_dyn(dim, &Region { r_lo: 1.0, r_hi: hi, angular: region.angular.clone() }, res, cfg, f)?;
        return Ok(Integral {
            value: inner.value + outer.value,
            error: inner.error + outer.error,
            cells: inner.cells + outer.cells,
        });
    }
    if lo == 0.0 {
        return dyadic_series(cfg, "inner dyadic cells", |k| {
            let b = hi * 0.5f64.powi(k as i32);
            if b < 1e-280 {
                return Ok(None);
            }
            shell(dim, &region.angular, 0.5 * b, b, res, cfg, f).map(Some)
        });
    }
    if hi.is_infinite() {
        return dyadic_series(cfg, "outer dyadic cells", |k| {
            let a = lo * 2f64.powi(k as i32);
            if a > 1e280 {
                return Ok(None);
            }
            shell(dim, &region.angular, a, 2.0 * a, res, cfg, f).map(Some)
        });
    }
    let mut total = 0.0;
    let mut b = hi;
    let mut cells = 0;
    while b > lo {
        let a = if b / lo > 2.0 { 0.5 * b } else { lo };
        total += shell(dim, &region.angular, a, b, res, cfg, f)?;
        cells += 1;
        b = a;
    }
    Ok(Integral { value: total, error: 0.0, cells })
}

/// Measure of the unit sphere S^{dim-1} (counting measure 2 for dim 1).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            let k = dim as f64;
            // 2 π^{k/2} / Γ(k/2) via recursion |S^{k-1}| = 2π/(k-2) |S^{k-3}|
            2.0 * std::f64::consts::PI / (k - 2.0) * sphere_area(dim - 2)
        }
    }
}
