//! Discrete residual F(u) − f and its stiffness.

use super::spec::{Diffusion, EquationSpec, Term};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Block, Geometry, GridFunction};
use crate::levy::multiplier::fractional_multiplier;
use crate::levy::{JumpFunction, JumpMap, LevyKernel};
use crate::operators::{apply_nonlocal, eval_levy_ito, OperatorQuadrature, SpectralMultiplier, SplitSpec};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Floor inside the power of sublinear gradient terms.
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// Discretization switches shared by the solvers.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Evaluate fractional-type terms by Fourier multipliers when possible.
    pub fast_path: bool,
    pub oq: OperatorQuadrature,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization { fast_path: true, oq: OperatorQuadrature::default() }
    }
}

enum Op {
    Laplacian { a: Vec<f64>, axes: Vec<usize> },
    Trace { a: Vec<Vec<Vec<f64>>>, axes: Vec<usize> },
    /// weight(x)·(M u)(x).
    Spectral { mult: SpectralMultiplier, weight: Vec<f64> },
    /// −weight(x)·I[x,u] by direct quadrature.
    Direct { kernel: LevyKernel, jump: Option<JumpFunction>, block: Block, weight: Vec<f64>, scale: f64 },
    Gradient { b: Vec<f64>, k: f64, axes: Vec<usize>, cutoff: Option<f64> },
    Drift { b: Vec<Vec<f64>> },
    Zeroth(f64),
    Forcing(Vec<f64>),
}

fn sample(g: &Geometry, f: &ScalarField) -> Vec<f64> {
    (0..g.len()).into_par_iter().map(|i| f.eval(&g.coords(i))).collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scale s^β when j(z) = s·z, so that the Lévy–Itô operator of a symmetric
/// fractional kernel is s^β times the plain one.
fn jump_scale(jump: Option<&JumpFunction>, beta: f64) -> Option<f64> {
    match jump.map(|j| &j.map) {
        None | Some(JumpMap::Identity) => Some(1.0),
        Some(JumpMap::Scaled(s)) => Some(s.abs().powf(beta)),
        _ => None,
    }
}

fn compile_term(g: &Geometry, t: &Term, disc: &Discretization) -> Result<Op> {
    Ok(match t {
        Term::LocalTrace { a: Diffusion::Scalar(a), block } => Op::Laplacian { a: sample(g, a), axes: g.axes(*block).collect() },
        Term::LocalTrace { a: Diffusion::Matrix(m), block } => Op::Trace {
            a: m.iter().map(|row| row.iter().map(|f| sample(g, f)).collect()).collect(),
            axes: g.axes(*block).collect(),
        },
        Term::Nonlocal { kernel, jump, coefficient, block, sign } => {
            let c = sample(g, coefficient);
            let axes: Vec<usize> = g.axes(*block).collect();
            let factor = jump_scale(jump.as_ref(), kernel.beta).filter(|_| kernel.fractional_factor(&vec![0.0; kernel.dim]).is_some());
            match factor {
                Some(s) if disc.fast_path => {
                    let support: Vec<usize> = kernel.support().iter().map(|&k| axes[k]).collect();
                    let mult = SpectralMultiplier::fractional_axes(*g, kernel.beta, &support)?;
                    let weight = (0..g.len())
                        .into_par_iter()
                        .map(|i| {
                            let x = g.coords(i);
                            let kx: Vec<f64> = axes.iter().map(|&a| x[a]).collect();
                            sign * c[i] * s * kernel.fractional_factor(&kx).unwrap()
                        })
                        .collect();
                    Op::Spectral { mult, weight }
                }
                _ if disc.fast_path && kernel.is_x_independent() && jump.as_ref().is_none_or(|j| j.is_x_independent()) => {
                    let mult = SpectralMultiplier::levy(kernel, jump.as_ref(), *g, *block, &disc.oq)?;
                    Op::Spectral { mult, weight: c.iter().map(|v| -sign * v).collect() }
                }
                _ => {
                    if jump.is_some() && *block != Block::Full {
                        return Err(Error::Unsupported("Lévy–Itô terms restricted to a block".into()));
                    }
                    let scale = direct_scale(g, kernel, &axes);
                    Op::Direct { kernel: kernel.clone(), jump: jump.clone(), block: *block, weight: c.iter().map(|v| sign * v).collect(), scale }
                }
            }
        }
        Term::GradientPower { b, exponent, block, cutoff } => {
            Op::Gradient { b: sample(g, b), k: *exponent, axes: g.axes(*block).collect(), cutoff: *cutoff }
        }
        Term::Drift { b } => Op::Drift { b: b.iter().map(|f| sample(g, f)).collect() },
        Term::ZerothOrder { c } => Op::Zeroth(*c),
        Term::Forcing { f } => Op::Forcing(f.values.clone()),
    })
}

/// Stiffness of a direct-quadrature term: the fractional symbol at the
/// Nyquist mode times the largest density scale |z|^{k+β}μ_x(z) seen on the
/// lattice at |z| = h.
fn direct_scale(g: &Geometry, kernel: &LevyKernel, axes: &[usize]) -> f64 {
    let k = kernel.dim;
    let h = g.h();
    let mut scale: f64 = 0.0;
    for x in super::spec::sample_points(g) {
        let kx: Vec<f64> = axes.iter().map(|&a| x[a]).collect();
        for axis in 0..k {
            for s in [-1.0, 1.0] {
                let mut z = vec![0.0; k];
                z[axis] = s * h;
                scale = scale.max(kernel.density(&kx, &z) * h.powf(k as f64 + kernel.beta));
            }
        }
    }
    let xi = PI * g.n as f64 * (k as f64).sqrt();
    2.0 * scale * fractional_multiplier(k, kernel.beta, xi).unwrap_or(f64::INFINITY)
}

/// Neighbour tables of a lattice.
struct Stencil {
    h: f64,
    up: Vec<Vec<usize>>,
    dn: Vec<Vec<usize>>,
}

impl Stencil {
    fn new(g: &Geometry) -> Stencil {
        let table = |delta| (0..g.d()).map(|a| (0..g.len()).map(|i| g.neighbor(i, a, delta)).collect()).collect();
        Stencil { h: g.h(), up: table(1), dn: table(-1) }
    }
}

fn second_difference(st: &Stencil, v: &[f64], i: usize, a: usize, b: usize) -> f64 {
    let h2 = st.h * st.h;
    if a == b {
        (v[st.up[a][i]] - 2.0 * v[i] + v[st.dn[a][i]]) / h2
    } else {
        let p = st.up[a][i];
        let m = st.dn[a][i];
        (v[st.up[b][p]] - v[st.dn[b][p]] - v[st.up[b][m]] + v[st.dn[b][m]]) / (4.0 * h2)
    }
}

/// Magnitude of the block gradient: monotone upwind differences for k ≥ 1
/// (the orientation depends on the sign of b), centered otherwise.
fn gradient_norm(st: &Stencil, v: &[f64], i: usize, axes: &[usize], k: f64, b: f64) -> f64 {
    let h = st.h;
    let mut s = 0.0;
    for &a in axes {
        let up = v[st.up[a][i]];
        let dn = v[st.dn[a][i]];
        let (fwd, bwd) = ((up - v[i]) / h, (v[i] - dn) / h);
        let q = if k < 1.0 {
            (up - dn) / (2.0 * h)
        } else if b >= 0.0 {
            bwd.max(0.0).max(-fwd)
        } else {
            (-bwd).max(0.0).max(fwd)
        };
        s += q * q;
    }
    s.sqrt()
}

fn locate(e: Error, x: &[f64]) -> Error {
    match e {
        Error::QuadratureFailure { context, estimated_error, tolerance } => {
            Error::QuadratureFailure { context: format!("{context} at x = {x:?}"), estimated_error, tolerance }
        }
        other => other,
    }
}

impl Op {
    fn eval(&self, u: &GridFunction, disc: &Discretization, st: &Stencil) -> Result<Vec<f64>> {
        let g = &u.geometry;
        let v = &u.values;
        let n = g.len();
        let h = g.h();
        Ok(match self {
            Op::Laplacian { a, axes } => (0..n)
                .into_par_iter()
                .with_min_len(256)
                .map(|i| -a[i] * axes.iter().map(|&ax| second_difference(st, v, i, ax, ax)).sum::<f64>())
                .collect(),
            Op::Trace { a, axes } => (0..n)
                .into_par_iter()
                .with_min_len(256)
                .map(|i| {
                    let mut s = 0.0;
                    for (p, &ap) in axes.iter().enumerate() {
                        for (q, &aq) in axes.iter().enumerate() {
                            s += a[p][q][i] * second_difference(st, v, i, ap, aq);
                        }
                    }
                    -s
                })
                .collect(),
            Op::Spectral { mult, weight } => {
                let m = mult.apply(u)?;
                m.values.iter().zip(weight).map(|(a, w)| a * w).collect()
            }
            Op::Direct { kernel, jump, block, weight, .. } => {
                let split = SplitSpec::default();
                let vals = match jump {
                    None => apply_nonlocal(kernel, u, *block, &split, &disc.oq)?.values,
                    Some(j) => (0..n)
                        .into_par_iter()
                        .map(|i| {
                            let x = g.coords(i);
                            eval_levy_ito(j, kernel, u, &x, &split, &disc.oq).map_err(|e| locate(e, &x))
                        })
                        .collect::<Result<Vec<f64>>>()?,
                };
                vals.iter().zip(weight).map(|(a, w)| -a * w).collect()
            }
            Op::Gradient { b, k, axes, cutoff } => {
                if *cutoff == Some(0.0) {
                    return Ok(vec![0.0; n]);
                }
                (0..n)
                    .into_par_iter()
                    .with_min_len(256)
                    .map(|i| {
                        let mut p = gradient_norm(st, v, i, axes, *k, b[i]);
                        if let Some(r) = cutoff {
                            p = p.min(*r);
                        }
                        if *k < 1.0 {
                            p = p.max(GRADIENT_FLOOR);
                        }
                        b[i] * p.powf(*k)
                    })
                    .collect()
            }
            Op::Drift { b } => (0..n)
                .into_par_iter()
                .with_min_len(256)
                .map(|i| {
                    let mut s = 0.0;
                    for (a, ba) in b.iter().enumerate() {
                        let c = ba[i];
                        let d = if c >= 0.0 {
                            (v[i] - v[st.dn[a][i]]) / h
                        } else {
                            (v[st.up[a][i]] - v[i]) / h
                        };
                        s += c * d;
                    }
                    s
                })
                .collect(),
            Op::Zeroth(c) => v.iter().map(|x| c * x).collect(),
            Op::Forcing(f) => f.iter().map(|x| -x).collect(),
        })
    }

    /// Linearized diagonal stiffness at u.
    fn stiffness(&self, u: &GridFunction, st: &Stencil) -> f64 {
        let g = &u.geometry;
        let h = g.h();
        match self {
            Op::Laplacian { a, axes } => sup(a) * 4.0 * axes.len() as f64 / (h * h),
            Op::Trace { a, .. } => {
                let mut s = 0.0;
                for (p, row) in a.iter().enumerate() {
                    for (q, f) in row.iter().enumerate() {
                        s += sup(f) * if p == q { 4.0 } else { 2.0 };
                    }
                }
                s / (h * h)
            }
            Op::Spectral { mult, weight } => sup(weight) * mult.max_abs(),
            Op::Direct { weight, scale, .. } => sup(weight) * scale,
            Op::Gradient { b, k, axes, cutoff } => {
                if *k == 0.0 || *cutoff == Some(0.0) {
                    return 0.0;
                }
                let gmax = (0..g.len())
                    .map(|i| gradient_norm(st, &u.values, i, axes, *k, b[i]))
                    .fold(0.0, f64::max)
                    .min(cutoff.unwrap_or(f64::INFINITY))
                    .max(h);
                sup(b) * k * gmax.powf(k - 1.0) * axes.len() as f64 / h
            }
            Op::Drift { b } => b.iter().map(|f| sup(f)).sum::<f64>() / h,
            Op::Zeroth(c) => c.abs(),
            Op::Forcing(_) => 0.0,
        }
    }
}

/// An equation prepared for repeated residual evaluation on its lattice.
pub struct CompiledSpec {
    pub geometry: Geometry,
    disc: Discretization,
    stencil: Stencil,
    base: Vec<Op>,
    gamma: Vec<Vec<Op>>,
    delta: Vec<Vec<Op>>,
}

/// Residual field and the active (γ, δ) at every lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub residual: GridFunction,
    pub selection: Vec<(usize, usize)>,
}

impl CompiledSpec {
    pub fn new(spec: &EquationSpec, disc: &Discretization) -> Result<CompiledSpec> {
        spec.validate()?;
        let g = spec.geometry;
        let compile = |ts: &[Term]| ts.iter().map(|t| compile_term(&g, t, disc)).collect::<Result<Vec<Op>>>();
        let (gamma, delta) = match &spec.controls {
            Some(c) => (
                c.gamma.iter().map(|v| compile(v)).collect::<Result<Vec<_>>>()?,
                c.delta.iter().map(|v| compile(v)).collect::<Result<Vec<_>>>()?,
            ),
            None => (vec![vec![]], vec![vec![]]),
        };
        Ok(CompiledSpec { geometry: g, disc: disc.clone(), stencil: Stencil::new(&g), base: compile(&spec.terms)?, gamma, delta })
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.geometry != self.geometry {
            return Err(Error::GeometryMismatch(format!("{:?} vs {:?}", u.geometry, self.geometry)));
        }
        Ok(())
    }

    /// Pointwise sup_γ inf_δ of the variant residuals; ties keep the first
    /// index.
    pub fn residual(&self, u: &GridFunction) -> Result<ResidualField> {
        self.check(u)?;
        let n = u.values.len();
        let mut base = vec![0.0; n];
        for op in &self.base {
            for (b, v) in base.iter_mut().zip(op.eval(u, &self.disc, &self.stencil)?) {
                *b += v;
            }
        }
        let eval_all = |ops: &Vec<Vec<Op>>| -> Result<Vec<Vec<Vec<f64>>>> {
            ops.iter().map(|v| v.iter().map(|op| op.eval(u, &self.disc, &self.stencil)).collect()).collect()
        };
        let gv = eval_all(&self.gamma)?;
        let dv = eval_all(&self.delta)?;
        if gv.len() == 1 && dv.len() == 1 {
            for part in gv[0].iter().chain(&dv[0]) {
                for (b, v) in base.iter_mut().zip(part) {
                    *b += v;
                }
            }
            return Ok(ResidualField { residual: GridFunction { geometry: u.geometry, values: base }, selection: vec![(0, 0); n] });
        }
        let (values, selection): (Vec<f64>, Vec<(usize, usize)>) = (0..n)
            .into_par_iter()
            .with_min_len(256)
            .map(|i| {
                let mut best = (f64::NEG_INFINITY, (0, 0));
                for (gi, g) in gv.iter().enumerate() {
                    let mut low = (f64::INFINITY, 0);
                    let mut with_g = base[i];
                    for part in g {
                        with_g += part[i];
                    }
                    for (di, d) in dv.iter().enumerate() {
                        let mut r = with_g;
                        for part in d {
                            r += part[i];
                        }
                        if r < low.0 {
                            low = (r, di);
                        }
                    }
                    if low.0 > best.0 {
                        best = (low.0, (gi, low.1));
                    }
                }
                best
            })
            .unzip();
        Ok(ResidualField { residual: GridFunction { geometry: u.geometry, values }, selection })
    }

    /// Residual of a single variant.
    pub fn variant_residual(&self, u: &GridFunction, gamma: usize, delta: usize) -> Result<GridFunction> {
        self.check(u)?;
        if gamma >= self.gamma.len() || delta >= self.delta.len() {
            return Err(Error::InvalidInput(format!("variant ({gamma}, {delta}) out of range")));
        }
        let mut out = vec![0.0; u.values.len()];
        for op in self.base.iter().chain(&self.gamma[gamma]).chain(&self.delta[delta]) {
            for (b, v) in out.iter_mut().zip(op.eval(u, &self.disc, &self.stencil)?) {
                *b += v;
            }
        }
        Ok(GridFunction { geometry: u.geometry, values: out })
    }

    /// Sum of the term stiffnesses at u, maximized over variants.
    pub fn stiffness(&self, u: &GridFunction) -> f64 {
        if self.gamma.len() == 1 && self.delta.len() == 1 {
            return self.base.iter().chain(&self.gamma[0]).chain(&self.delta[0]).map(|op| op.stiffness(u, &self.stencil)).sum();
        }
        let sum = |ops: &[Op]| ops.iter().map(|op| op.stiffness(u, &self.stencil)).sum::<f64>();
        let base = sum(&self.base);
        let g = self.gamma.iter().map(|v| sum(v)).fold(0.0, f64::max);
        let d = self.delta.iter().map(|v| sum(v)).fold(0.0, f64::max);
        base + g + d
    }

    /// True when the stiffness does not depend on u.
    pub fn has_constant_stiffness(&self) -> bool {
        let all = self.base.iter().chain(self.gamma.iter().flatten()).chain(self.delta.iter().flatten());
        all.into_iter().all(|op| !matches!(op, Op::Gradient { .. }))
    }

    /// True when every nonlocal term is evaluated by a Fourier multiplier.
    pub fn is_spectral(&self) -> bool {
        let all = self.base.iter().chain(self.gamma.iter().flatten()).chain(self.delta.iter().flatten());
        all.into_iter().all(|op| !matches!(op, Op::Direct { .. }))
    }
}

/// Pointwise F(u) − f, with sup-inf over the control families.
pub fn residual(spec: &EquationSpec, u: &GridFunction) -> Result<GridFunction> {
    Ok(CompiledSpec::new(spec, &Discretization::default())?.residual(u)?.residual)
}
