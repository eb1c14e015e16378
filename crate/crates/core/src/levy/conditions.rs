//! Empirical verification of the measure conditions (M1)–(M3) and the jump
//! conditions (J1)–(J5) over a finite sample plan.

use super::cone::{cone_mass_at, ConeSpec};
use super::jump::JumpFunction;
use super::kernel::LevyKernel;
use crate::error::{Error, Result};
use crate::quadrature::{AngularResolution, QuadratureConfig, Region};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub points: Vec<Vec<f64>>,
    pub axes: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub apertures: Vec<f64>,
    pub separations: Vec<f64>,
}

impl SamplePlan {
    /// A small default plan in dimension `dim`.
    pub fn standard(dim: usize) -> SamplePlan {
        let golden = [0.618_033_988_749_895, 0.754_877_666_246_693, 0.569_840_290_998_053];
        let points = (0..5)
            .map(|i| (0..dim).map(|k| ((i as f64 + 0.5) * golden[k % 3]).fract()).collect())
            .collect();
        let mut axes: Vec<Vec<f64>> = (0..dim)
            .map(|k| (0..dim).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        if dim > 1 {
            axes.push(vec![1.0; dim]);
        }
        SamplePlan {
            points,
            axes,
            radii: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            apertures: vec![0.1, 0.3, 0.6],
            separations: vec![0.1, 0.03, 0.01, 0.003],
        }
    }

    pub fn with_axes(mut self, axes: Vec<Vec<f64>>) -> SamplePlan {
        self.axes = axes;
        self
    }

    fn check(&self) -> Result<()> {
        if self.points.is_empty() || self.axes.is_empty() || self.radii.is_empty() || self.apertures.is_empty() {
            return Err(Error::InvalidInput("sample plan needs points, axes, radii and apertures".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::InvalidInput("plan radii must lie in (0, 1)".into()));
        }
        if self.apertures.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidInput("plan apertures must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "points={} axes={} radii={:?} apertures={:?} separations={:?}",
            self.points.len(),
            self.axes.len(),
            self.radii,
            self.apertures,
            self.separations
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub condition: String,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    pub note: String,
}

impl ConditionResult {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub subject: String,
    pub plan: String,
    pub results: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn get(&self, condition: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.condition == condition)
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// Flat key-value form, one entry per field.
    pub fn to_records(&self) -> Vec<(String, String)> {
        let mut out = vec![("subject".to_string(), self.subject.clone()), ("plan".to_string(), self.plan.clone())];
        for r in &self.results {
            out.push((format!("{}.pass", r.condition), r.pass.to_string()));
            for (k, v) in &r.constants {
                out.push((format!("{}.{}", r.condition, k), format!("{v:e}")));
            }
            if !r.note.is_empty() {
                out.push((format!("{}.note", r.condition), r.note.clone()));
            }
        }
        out
    }
}

fn fmt_axis(a: &[f64]) -> String {
    let s: Vec<String> = a.iter().map(|v| format!("{v}")).collect();
    format!("({})", s.join(";"))
}

fn sq(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

fn norm(z: &[f64]) -> f64 {
    sq(z).sqrt()
}

/// Least-squares slope and intercept of log y against log x.
pub(crate) fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn pair_direction(dim: usize) -> Vec<f64> {
    let s = 1.0 / (dim as f64).sqrt();
    vec![s; dim]
}

fn ring_scale(beta: f64, delta: f64) -> f64 {
    if (beta - 1.0).abs() < 1e-12 {
        delta.ln().abs()
    } else {
        delta.powf(1.0 - beta)
    }
}

fn radii_within(kernel: &LevyKernel, plan: &SamplePlan) -> Vec<f64> {
    plan.radii.iter().copied().filter(|r| *r <= kernel.tail_radius).collect()
}

/// Checks (M1)–(M3) for `kernel` over `plan`.
pub fn verify_measure_conditions(kernel: &LevyKernel, plan: &SamplePlan, cfg: &QuadratureConfig) -> Result<ConditionReport> {
    plan.check()?;
    let d = kernel.dim;
    let beta = kernel.beta;
    let radii = radii_within(kernel, plan);
    let mut results = Vec::new();

    // (M1)
    let c_tilde = kernel.m1_constant(&plan.points, cfg)?;
    results.push(ConditionResult {
        condition: "M1".into(),
        pass: c_tilde.is_finite() && c_tilde > 0.0,
        constants: vec![("C_tilde".into(), c_tilde)],
        note: String::new(),
    });

    // (M2), per axis with the best aperture of the plan.
    let mut m2_min = f64::INFINITY;
    let mut m2_all = true;
    for axis in &plan.axes {
        if axis.len() != d {
            return Err(Error::InvalidInput("plan axis dimension differs from kernel dimension".into()));
        }
        let mut best = (f64::NEG_INFINITY, plan.apertures[0]);
        let mut degenerate = false;
        for &eta in &plan.apertures {
            let mut ratio = f64::INFINITY;
            for x in &plan.points {
                for &delta in &radii {
                    let m = cone_mass_at(kernel, x, &ConeSpec::new(axis, eta, delta)?, cfg)?;
                    degenerate |= m.degenerate;
                    let scale = eta.powf((d as f64 - 1.0) / 2.0) * delta.powf(2.0 - beta);
                    ratio = ratio.min(m.value / scale);
                }
            }
            if ratio > best.0 {
                best = (ratio, eta);
            }
        }
        let (c_mu, eta) = best;
        let masses: Vec<f64> = radii
            .iter()
            .map(|&delta| cone_mass_at(kernel, &plan.points[0], &ConeSpec::new(axis, eta, delta).unwrap(), cfg).map(|m| m.value))
            .collect::<Result<_>>()?;
        let slope = loglog_fit(&radii, &masses).map(|f| f.0).unwrap_or(f64::NAN);
        let pass = c_mu > 0.0 && c_mu.is_finite();
        m2_all &= pass;
        m2_min = m2_min.min(c_mu);
        results.push(ConditionResult {
            condition: format!("M2[axis={}]", fmt_axis(axis)),
            pass,
            constants: vec![
                ("C_mu".into(), c_mu),
                ("eta".into(), eta),
                ("delta_exponent".into(), slope),
                ("expected_delta_exponent".into(), 2.0 - beta),
            ],
            note: if degenerate { "cone misses the support of the measure".into() } else { String::new() },
        });
    }
    results.push(ConditionResult {
        condition: "M2".into(),
        pass: m2_all,
        constants: vec![("C_mu".into(), m2_min)],
        note: String::new(),
    });

    // (M3)
    if kernel.is_x_independent() {
        results.push(ConditionResult {
            condition: "M3".into(),
            pass: true,
            constants: vec![("C_mu_ball".into(), 0.0), ("C_mu_ring".into(), 0.0)],
            note: "x-independent kernel: identical measures".into(),
        });
    } else {
        let dir = pair_direction(d);
        let gamma_decl = kernel.holder_gamma;
        let mut ball_c: f64 = 0.0;
        let mut ring_c: f64 = 0.0;
        let mut diffs = Vec::new();
        let res = AngularResolution::Fixed(64);
        for &s in &plan.separations {
            let gamma = gamma_decl.unwrap_or(1.0);
            let mut dmax: f64 = 0.0;
            for x in &plan.points {
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                for &delta in &radii {
                    let ball = kernel.integrate_abs_difference(x, &y, &Region::ball(delta), res, cfg, sq)?.value;
                    let ring = kernel.integrate_abs_difference(x, &y, &Region::shell(delta, 1.0), res, cfg, norm)?.value;
                    ball_c = ball_c.max(ball / (s.powf(gamma) * delta.powf(2.0 - beta)));
                    ring_c = ring_c.max(ring / (s.powf(gamma) * ring_scale(beta, delta)));
                    if delta == radii[0] {
                        dmax = dmax.max(ball);
                    }
                }
            }
            diffs.push(dmax);
        }
        let gamma_hat = loglog_fit(&plan.separations, &diffs).map(|f| f.0).unwrap_or(f64::NAN);
        let finite = ball_c.is_finite() && ring_c.is_finite();
        let pass = finite && gamma_decl.map_or(gamma_hat > 0.0, |g| gamma_hat >= g - 0.1);
        results.push(ConditionResult {
            condition: "M3".into(),
            pass,
            constants: vec![
                ("C_mu_ball".into(), ball_c),
                ("C_mu_ring".into(), ring_c),
                ("gamma_hat".into(), gamma_hat),
                ("gamma".into(), gamma_decl.unwrap_or(f64::NAN)),
            ],
            note: String::new(),
        });
    }

    Ok(ConditionReport { subject: kernel.id(), plan: plan.summary(), results })
}

fn sample_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        dirs.push(e.clone());
        e[k] = -1.0;
        dirs.push(e);
    }
    if dim > 1 {
        let s = 1.0 / (dim as f64).sqrt();
        dirs.push(vec![s; dim]);
        let mut alt: Vec<f64> = (0..dim).map(|k| if k % 2 == 0 { s } else { -s }).collect();
        dirs.push(alt.clone());
        alt.iter_mut().for_each(|v| *v = -*v);
        dirs.push(alt);
    }
    dirs
}

/// Checks (J1)–(J5) for `jump` against `kernel` over `plan`.
pub fn verify_jump_conditions(
    jump: &JumpFunction,
    kernel: &LevyKernel,
    plan: &SamplePlan,
    cfg: &QuadratureConfig,
) -> Result<ConditionReport> {
    plan.check()?;
    if jump.dim != kernel.dim {
        return Err(Error::InvalidInput(format!("jump dimension {} differs from kernel dimension {}", jump.dim, kernel.dim)));
    }
    let d = kernel.dim;
    let beta = kernel.beta;
    let res = AngularResolution::Fixed(64);
    let radii = radii_within(kernel, plan);
    let mut results = Vec::new();
    let mut j = vec![0.0; d];

    // (J1)
    let mut c_tilde: f64 = 0.0;
    for x in &plan.points {
        let outer = kernel.tail_mass(x, 1.0, cfg)?;
        let inner = kernel
            .integrate(x, &Region::ball(1.0), res, cfg, |z| {
                jump.eval_into(x, z, &mut j);
                sq(&j)
            })?
            .value;
        c_tilde = c_tilde.max(inner + outer);
    }
    results.push(ConditionResult {
        condition: "J1".into(),
        pass: c_tilde.is_finite() && c_tilde > 0.0,
        constants: vec![("C_tilde".into(), c_tilde)],
        note: String::new(),
    });

    // (J2)
    let mut j2_all = true;
    let mut j2_min = f64::INFINITY;
    for axis in &plan.axes {
        let an = norm(axis);
        let a: Vec<f64> = axis.iter().map(|v| v / an).collect();
        let mut best = (f64::NEG_INFINITY, plan.apertures[0]);
        for &eta in &plan.apertures {
            let mut ratio = f64::INFINITY;
            for x in &plan.points {
                for &delta in &radii {
                    let r = delta / jump.c0;
                    let m = kernel
                        .integrate(x, &Region::ball(r), res, cfg, |z| {
                            jump.eval_into(x, z, &mut j);
                            let jn = norm(&j);
                            let p: f64 = j.iter().zip(&a).map(|(u, v)| u * v).sum();
                            if jn <= delta && (1.0 - eta) * jn <= p.abs() {
                                jn * jn
                            } else {
                                0.0
                            }
                        })?
                        .value;
                    let scale = eta.powf((d as f64 - 1.0) / 2.0) * delta.powf(2.0 - beta);
                    ratio = ratio.min(m / scale);
                }
            }
            if ratio > best.0 {
                best = (ratio, eta);
            }
        }
        let pass = best.0 > 0.0 && best.0.is_finite();
        j2_all &= pass;
        j2_min = j2_min.min(best.0);
        results.push(ConditionResult {
            condition: format!("J2[axis={}]", fmt_axis(axis)),
            pass,
            constants: vec![("C_mu".into(), best.0), ("eta".into(), best.1)],
            note: String::new(),
        });
    }
    results.push(ConditionResult {
        condition: "J2".into(),
        pass: j2_all,
        constants: vec![("C_mu".into(), j2_min)],
        note: String::new(),
    });

    // (J3), both branches of the bound.
    let x0 = &plan.points[0];
    let mut j3: f64 = 0.0;
    let mut rings = Vec::new();
    for &delta in &radii {
        let ring = kernel.integrate(x0, &Region::shell(delta, 1.0), res, cfg, norm)?.value;
        rings.push(ring);
        j3 = j3.max(ring / ring_scale(beta, delta));
    }
    let branch = if (beta - 1.0).abs() < 1e-12 { "log" } else { "power" };
    results.push(ConditionResult {
        condition: "J3".into(),
        pass: j3.is_finite(),
        constants: vec![("C_tilde".into(), j3)],
        note: format!("{branch} branch"),
    });

    // (J4)
    let dirs = sample_directions(d);
    let zr = [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut holder: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let pdir = pair_direction(d);
    let mut jy = vec![0.0; d];
    for x in &plan.points {
        for dir in &dirs {
            for &r in &zr {
                let z: Vec<f64> = dir.iter().map(|v| v * r).collect();
                jump.eval_into(x, &z, &mut j);
                let q = norm(&j) / r;
                lo = lo.min(q);
                hi = hi.max(q);
                for &s in &plan.separations {
                    let y: Vec<f64> = x.iter().zip(&pdir).map(|(a, b)| a + s * b).collect();
                    jump.eval_into(&y, &z, &mut jy);
                    let diff = norm(&j.iter().zip(&jy).map(|(a, b)| a - b).collect::<Vec<_>>());
                    if r <= 1.0 {
                        holder = holder.max(diff / (r * s.powf(jump.gamma)));
                    } else {
                        tail = tail.max(diff / s.powf(jump.gamma));
                    }
                }
            }
        }
    }
    let tol = 1e-9;
    let j4_pass = lo >= jump.c0 * (1.0 - tol) && hi <= jump.big_c0 * (1.0 + tol) && holder <= jump.big_c0 * (1.0 + tol);
    results.push(ConditionResult {
        condition: "J4".into(),
        pass: j4_pass,
        constants: vec![
            ("c0_empirical".into(), lo),
            ("C0_empirical".into(), hi),
            ("holder_constant".into(), holder),
            ("c0".into(), jump.c0),
            ("C0".into(), jump.big_c0),
        ],
        note: String::new(),
    });
    results.push(ConditionResult {
        condition: "J5".into(),
        pass: tail <= jump.tail_lipschitz * (1.0 + tol) + 1e-14,
        constants: vec![("C0_tilde_empirical".into(), tail), ("C0_tilde".into(), jump.tail_lipschitz)],
        note: String::new(),
    });

    Ok(ConditionReport { subject: format!("jump/{}", kernel.id()), plan: plan.summary(), results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::levy::jump::JumpMap;
    use std::sync::Arc;

    #[test]
    fn fractional_kernel_satisfies_measure_conditions() {
        let k = LevyKernel::fractional(2, 1.0).unwrap();
        let r = verify_measure_conditions(&k, &SamplePlan::standard(2), &QuadratureConfig::default()).unwrap();
        assert!(r.all_pass(), "{r:?}");
        let m2 = r.get("M2[axis=(1;0)]").unwrap();
        assert!((m2.constant("delta_exponent").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn directional_kernel_fails_off_support_axis() {
        let k = LevyKernel::directional(2, 1.0, vec![1]).unwrap();
        let r = verify_measure_conditions(&k, &SamplePlan::standard(2), &QuadratureConfig::default()).unwrap();
        assert!(!r.get("M2[axis=(1;0)]").unwrap().pass);
        assert!(r.get("M2[axis=(0;1)]").unwrap().pass);
        assert!(!r.get("M2").unwrap().pass);
    }

    #[test]
    fn modulated_kernel_holder_exponent() {
        let coef = ScalarField::func(|x: &[f64]| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x[0]).sin());
        let k = LevyKernel::x_modulated(1, 1.5, coef, 1.0).unwrap();
        let r = verify_measure_conditions(&k, &SamplePlan::standard(1), &QuadratureConfig::default()).unwrap();
        let m3 = r.get("M3").unwrap();
        assert!(m3.pass, "{m3:?}");
        assert!(m3.constant("gamma_hat").unwrap() > 0.9);
    }

    #[test]
    fn jump_conditions_identity_and_modulated() {
        let k = LevyKernel::fractional(2, 1.0).unwrap();
        let plan = SamplePlan::standard(2);
        let cfg = QuadratureConfig::default();
        let r = verify_jump_conditions(&JumpFunction::identity(2), &k, &plan, &cfg).unwrap();
        assert!(r.all_pass(), "{r:?}");
        let f: Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync> = Arc::new(|x, z, out| {
            let s = 1.0 + 0.1 * (2.0 * std::f64::consts::PI * x[0]).sin();
            for (o, v) in out.iter_mut().zip(z) {
                *o = s * v;
            }
        });
        let j = JumpFunction::new(2, JumpMap::Func(f.clone()), 0.9, 1.1, 1.0, 0.0).unwrap();
        let r = verify_jump_conditions(&j, &k, &plan, &cfg).unwrap();
        assert!(r.get("J4").unwrap().pass);
        assert!(!r.get("J5").unwrap().pass);
        let j = JumpFunction::new(2, JumpMap::Func(f), 0.9, 1.1, 1.0, 10.0 * 0.2 * std::f64::consts::PI).unwrap();
        assert!(verify_jump_conditions(&j, &k, &plan, &cfg).unwrap().get("J5").unwrap().pass);
    }

    #[test]
    fn empty_plan_rejected() {
        let k = LevyKernel::fractional(1, 1.0).unwrap();
        let mut p = SamplePlan::standard(1);
        p.points.clear();
        assert!(verify_measure_conditions(&k, &p, &QuadratureConfig::default()).is_err());
    }
}
