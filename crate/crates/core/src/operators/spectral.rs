//! Fourier multipliers on the periodic lattice.

use super::OperatorQuadrature;
use crate::error::{Error, Result};
use crate::grid::{Block, Geometry, GridFunction};
use crate::levy::multiplier::fractional_constant;
use crate::levy::{JumpFunction, LevyKernel};
use crate::quadrature::{AngularResolution, Region};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Signed frequency of lattice index i on an n-point axis.
fn frequency(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_axes(g: &Geometry, axes: &[usize], buf: &mut [Complex64], inverse: bool) {
    let n = g.n;
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for &axis in axes {
        let s = g.stride(axis);
        for hi in 0..buf.len() / (s * n) {
            for lo in 0..s {
                let start = hi * s * n + lo;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = buf[start + k * s];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    buf[start + k * s] = *v;
                }
            }
        }
    }
}

/// Diagonal operator û(k) ↦ symbol(k)·û(k).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMultiplier {
    pub geometry: Geometry,
    /// Axes the symbol depends on; transforms run along these only.
    pub axes: Vec<usize>,
    pub symbol: Vec<Complex64>,
}

impl SpectralMultiplier {
    fn from_fn(geometry: Geometry, axes: &[usize], f: impl Fn(&[f64]) -> Complex64 + Sync) -> SpectralMultiplier {
        let symbol = (0..geometry.len())
            .into_par_iter()
            .map(|i| {
                let idx = geometry.unravel(i);
                let xi: Vec<f64> = axes.iter().map(|&a| 2.0 * PI * frequency(idx[a], geometry.n)).collect();
                f(&xi)
            })
            .collect();
        SpectralMultiplier { geometry, axes: axes.to_vec(), symbol }
    }

    /// Unnormalized fractional Laplacian (−Δ)^{β/2} over a coordinate block:
    /// symbol c_{k,β}|ξ|^β with k the block dimension.
    pub fn fractional(geometry: Geometry, beta: f64, which: Block) -> Result<SpectralMultiplier> {
        let axes: Vec<usize> = geometry.axes(which).collect();
        if axes.is_empty() {
            return Err(Error::GeometryMismatch(format!("block {} is empty", which.label())));
        }
        Self::fractional_axes(geometry, beta, &axes)
    }

    /// The same multiplier acting on an arbitrary set of axes.
    pub fn fractional_axes(geometry: Geometry, beta: f64, axes: &[usize]) -> Result<SpectralMultiplier> {
        if axes.is_empty() || axes.iter().any(|&a| a >= geometry.d()) {
            return Err(Error::GeometryMismatch(format!("axes {axes:?} for dimension {}", geometry.d())));
        }
        let c = fractional_constant(axes.len(), beta)?;
        Ok(Self::from_fn(geometry, axes, |xi| {
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(if r == 0.0 { 0.0 } else { c * r.powf(beta) }, 0.0)
        }))
    }

    /// Symbol of the integral operator I for an x-independent kernel (and
    /// optional x-independent jump) acting on a block, by quadrature of
    /// ∫(e^{iξ·w} − 1 − iξ·w 1_B)μ(dz) with w = j(z).
    pub fn levy(
        kernel: &LevyKernel,
        jump: Option<&JumpFunction>,
        geometry: Geometry,
        which: Block,
        oq: &OperatorQuadrature,
    ) -> Result<SpectralMultiplier> {
        let axes: Vec<usize> = geometry.axes(which).collect();
        if kernel.dim != axes.len() {
            return Err(Error::GeometryMismatch(format!("kernel dimension {} for a block of dimension {}", kernel.dim, axes.len())));
        }
        if !kernel.is_x_independent() || jump.is_some_and(|j| !j.is_x_independent()) {
            return Err(Error::Unsupported("spectral symbol of an x-dependent operator".into()));
        }
        if let Some(j) = jump {
            if j.dim != kernel.dim {
                return Err(Error::GeometryMismatch("jump and kernel dimensions differ".into()));
            }
        }
        let k = kernel.dim;
        let origin = vec![0.0; k];
        let far = oq.far_radius_for(k);
        let outer_mass = kernel.tail_mass(&origin, 1.0, &oq.cfg)?;
        let res = AngularResolution::ArcSpacing(oq.arc_spacing);
        let cell = |xi: &[f64]| -> Result<Complex64> {
            if xi.iter().all(|v| *v == 0.0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut w = vec![0.0; k];
            let map = |z: &[f64], w: &mut [f64]| match jump {
                Some(j) => j.eval_into(&origin, z, w),
                None => w.copy_from_slice(z),
            };
            let phase = |w: &[f64]| xi.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            let re_in = kernel.integrate(&origin, &Region::ball(1.0), res, &oq.cfg, |z| {
                map(z, &mut w);
                let s = (0.5 * phase(&w)).sin();
                -2.0 * s * s
            })?;
            let re_out = kernel.integrate(&origin, &Region::shell(1.0, far), res, &oq.cfg, |z| {
                map(z, &mut w);
                phase(&w).cos()
            })?;
            let mut im = 0.0;
            if !kernel.is_symmetric() || jump.is_some() {
                im += kernel
                    .integrate(&origin, &Region::ball(1.0), res, &oq.cfg, |z| {
                        map(z, &mut w);
                        let t = phase(&w);
                        t.sin() - t
                    })?
                    .value;
                im += kernel
                    .integrate(&origin, &Region::shell(1.0, far), res, &oq.cfg, |z| {
                        map(z, &mut w);
                        phase(&w).sin()
                    })?
                    .value;
            }
            Ok(Complex64::new(re_in.value + re_out.value - outer_mass, im))
        };
        let symbol = (0..geometry.len())
            .into_par_iter()
            .map(|i| {
                let idx = geometry.unravel(i);
                let xi: Vec<f64> = axes.iter().map(|&a| 2.0 * PI * frequency(idx[a], geometry.n)).collect();
                cell(&xi)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralMultiplier { geometry, axes, symbol })
    }

    pub fn scaled(mut self, s: f64) -> SpectralMultiplier {
        self.symbol.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// Largest modulus of the symbol, the operator norm on the lattice.
    pub fn max_abs(&self) -> f64 {
        self.symbol.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.geometry != self.geometry {
            return Err(Error::GeometryMismatch(format!("{:?} vs {:?}", u.geometry, self.geometry)));
        }
        let g = self.geometry;
        let mut buf: Vec<Complex64> = u.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        fft_axes(&g, &self.axes, &mut buf, false);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        fft_axes(&g, &self.axes, &mut buf, true);
        let scale = 1.0 / (g.n as f64).powi(self.axes.len() as i32);
        GridFunction::new(g, buf.iter().map(|c| c.re * scale).collect())
    }
}

/// (−Δ)^{β/2}u over a block, unnormalized, by its Fourier multiplier.
pub fn fractional_laplacian_spectral(u: &GridFunction, beta: f64, which: Block) -> Result<GridFunction> {
    SpectralMultiplier::fractional(u.geometry, beta, which)?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_beta_one() {
        let g = Geometry::new(1, 0, 64).unwrap();
        let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let v = fractional_laplacian_spectral(&u, 1.0, Block::Full).unwrap();
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - 2.0 * PI * PI * b).abs() < 1e-9);
        }
        let c = fractional_laplacian_spectral(&GridFunction::constant(g, 4.0), 1.3, Block::Full).unwrap();
        assert!(c.sup_norm() < 1e-12);
    }

    #[test]
    fn block_restricted_multiplier() {
        let g = Geometry::new(1, 1, 32).unwrap();
        let u = GridFunction::from_fn(g, |x| (2.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).sin());
        let v = fractional_laplacian_spectral(&u, 1.0, Block::Two).unwrap();
        for (a, b) in v.values.iter().zip(&u.values) {
            assert!((a - PI * 4.0 * PI * b).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_symbol_matches_closed_form() {
        let g = Geometry::new(1, 0, 16).unwrap();
        for beta in [0.5, 1.0, 1.5] {
            let k = LevyKernel::fractional(1, beta).unwrap();
            let q = SpectralMultiplier::levy(&k, None, g, Block::Full, &OperatorQuadrature::default()).unwrap();
            let f = SpectralMultiplier::fractional(g, beta, Block::Full).unwrap();
            for i in 1..4 {
                let (a, b) = (q.symbol[i], f.symbol[i]);
                assert!((a.re + b.re).abs() < 1e-3 * b.re, "beta {beta} mode {i}: {a} vs {b}");
                assert!(a.im.abs() < 1e-12);
            }
        }
    }
}
