//! Lévy kernels μ_x(dz) given by densities.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::ScalarField;
use crate::quadrature::{integrate, Angular, AngularResolution, Integral, QuadratureConfig, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKindTag {
    IsotropicFractional,
    XModulated,
    DirectionalEmbedding,
    Custom,
}

impl KernelKindTag {
    pub fn label(self) -> &'static str {
        match self {
            KernelKindTag::IsotropicFractional => "isotropic-fractional",
            KernelKindTag::XModulated => "x-modulated",
            KernelKindTag::DirectionalEmbedding => "directional-embedding",
            KernelKindTag::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub enum KernelKind {
    /// |z|^{−dim−β}.
    IsotropicFractional,
    /// c(x)·|z|^{−dim−β}.
    XModulated { coefficient: ScalarField },
    /// |z_S|^{−|S|−β} on the coordinate subspace S (0-based axes), zero elsewhere.
    DirectionalEmbedding { support: Vec<usize> },
    /// Density expression in x and z (Lebesgue density on R^dim).
    Custom { density: Expr, symmetric: bool },
}

#[derive(Debug, Clone)]
pub struct LevyKernel {
    pub dim: usize,
    pub beta: f64,
    pub kind: KernelKind,
    pub tail_radius: f64,
    pub holder_gamma: Option<f64>,
    pub normalization: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// How an integration region in the support coordinates looks for a given axis.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportCone {
    Region(Angular),
    /// The cone misses the support entirely.
    Empty,
}

impl LevyKernel {
    fn check_beta(beta: f64) -> Result<()> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 2)")));
        }
        Ok(())
    }

    fn check_dim(dim: usize) -> Result<()> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Unsupported(format!("kernel dimension {dim} (supported: 1 to 3)")));
        }
        Ok(())
    }

    pub fn fractional(dim: usize, beta: f64) -> Result<LevyKernel> {
        Self::check_beta(beta)?;
        Self::check_dim(dim)?;
        Ok(LevyKernel {
            dim,
            beta,
            kind: KernelKind::IsotropicFractional,
            tail_radius: 1.0,
            holder_gamma: None,
            normalization: 1.0,
        })
    }

    pub fn x_modulated(dim: usize, beta: f64, coefficient: ScalarField, holder_gamma: f64) -> Result<LevyKernel> {
        Self::check_beta(beta)?;
        Self::check_dim(dim)?;
        if !(holder_gamma > 0.0 && holder_gamma <= 1.0) {
            return Err(Error::InvalidInput(format!("holder_gamma = {holder_gamma} outside (0, 1]")));
        }
        Ok(LevyKernel {
            dim,
            beta,
            kind: KernelKind::XModulated { coefficient },
            tail_radius: 1.0,
            holder_gamma: Some(holder_gamma),
            normalization: 1.0,
        })
    }

    pub fn directional(dim: usize, beta: f64, support: Vec<usize>) -> Result<LevyKernel> {
        Self::check_beta(beta)?;
        Self::check_dim(dim)?;
        if support.is_empty() || support.iter().any(|&s| s >= dim) {
            return Err(Error::InvalidInput(format!("support {support:?} invalid for dimension {dim}")));
        }
        let mut s = support;
        s.sort_unstable();
        s.dedup();
        Ok(LevyKernel {
            dim,
            beta,
            kind: KernelKind::DirectionalEmbedding { support: s },
            tail_radius: 1.0,
            holder_gamma: None,
            normalization: 1.0,
        })
    }

    pub fn custom(dim: usize, beta: f64, density: Expr, symmetric: bool) -> Result<LevyKernel> {
        Self::check_beta(beta)?;
        Self::check_dim(dim)?;
        density.check_dims(3, dim)?;
        Ok(LevyKernel {
            dim,
            beta,
            kind: KernelKind::Custom { density, symmetric },
            tail_radius: 1.0,
            holder_gamma: None,
            normalization: 1.0,
        })
    }

    pub fn with_normalization(mut self, c: f64) -> Self {
        self.normalization = c;
        self
    }

    pub fn with_tail_radius(mut self, r: f64) -> Self {
        self.tail_radius = r;
        self
    }

    pub fn tag(&self) -> KernelKindTag {
        match self.kind {
            KernelKind::IsotropicFractional => KernelKindTag::IsotropicFractional,
            KernelKind::XModulated { .. } => KernelKindTag::XModulated,
            KernelKind::DirectionalEmbedding { .. } => KernelKindTag::DirectionalEmbedding,
            KernelKind::Custom { .. } => KernelKindTag::Custom,
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match &self.kind {
            KernelKind::IsotropicFractional => format!("frac-d{}-b{}", self.dim, self.beta),
            KernelKind::XModulated { coefficient } => format!("xmod-d{}-b{}[{}]", self.dim, self.beta, coefficient),
            KernelKind::DirectionalEmbedding { support } => format!("dir-d{}-b{}-s{:?}", self.dim, self.beta, support),
            KernelKind::Custom { density, .. } => format!("custom-d{}-b{}[{}]", self.dim, self.beta, density),
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.kind {
            KernelKind::IsotropicFractional | KernelKind::DirectionalEmbedding { .. } => true,
            KernelKind::XModulated { coefficient } => coefficient.is_const(),
            KernelKind::Custom { density, .. } => density.max_x_index() == 0,
        }
    }

    /// True when μ_x(−A) = μ_x(A).
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            KernelKind::Custom { symmetric, .. } => *symmetric,
            _ => true,
        }
    }

    /// Coordinates carrying the measure.
    pub fn support(&self) -> Vec<usize> {
        match &self.kind {
            KernelKind::DirectionalEmbedding { support } => support.clone(),
            _ => (0..self.dim).collect(),
        }
    }

    pub fn integration_dim(&self) -> usize {
        self.support().len()
    }

    /// Isotropic fractional semantics up to an x-dependent factor.
    pub fn fractional_factor(&self, x: &[f64]) -> Option<f64> {
        match &self.kind {
            KernelKind::IsotropicFractional | KernelKind::DirectionalEmbedding { .. } => Some(self.normalization),
            KernelKind::XModulated { coefficient } => Some(self.normalization * coefficient.eval(x)),
            KernelKind::Custom { .. } => None,
        }
    }

    /// Density with respect to Lebesgue measure on the support coordinates,
    /// at the support-space point ζ.
    pub fn support_density(&self, x: &[f64], zeta: &[f64]) -> f64 {
        let k = zeta.len() as f64;
        match &self.kind {
            KernelKind::Custom { density, .. } => {
                let v = density.eval(x, zeta);
                self.normalization * v.max(0.0)
            }
            _ => {
                let r = norm(zeta);
                self.fractional_factor(x).unwrap() * r.powf(-k - self.beta)
            }
        }
    }

    /// Radon–Nikodym density of μ_x at z ∈ R^dim. For directional kernels
    /// this is the density along the support, zero off it.
    pub fn density(&self, x: &[f64], z: &[f64]) -> f64 {
        let support = self.support();
        for (k, v) in z.iter().enumerate() {
            if !support.contains(&k) && *v != 0.0 {
                return 0.0;
            }
        }
        let zeta: Vec<f64> = support.iter().map(|&k| z[k]).collect();
        self.support_density(x, &zeta)
    }

    /// Writes the ambient point of a support-space point.
    pub fn embed(&self, zeta: &[f64], out: &mut [f64]) {
        match &self.kind {
            KernelKind::DirectionalEmbedding { support } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for (i, &k) in support.iter().enumerate() {
                    out[k] = zeta[i];
                }
            }
            _ => out.copy_from_slice(zeta),
        }
    }

    /// Translates the cone condition (1−η)|z| ≤ |â·z| into support coordinates.
    pub fn support_cone(&self, axis: &[f64], cos_min: f64, complement: bool) -> SupportCone {
        let a = norm(axis);
        let unit: Vec<f64> = axis.iter().map(|v| v / a).collect();
        match &self.kind {
            KernelKind::DirectionalEmbedding { support } => {
                let proj: Vec<f64> = support.iter().map(|&k| unit[k]).collect();
                let p = norm(&proj);
                let c = if p > 0.0 { cos_min / p } else { f64::INFINITY };
                if c > 1.0 {
                    if complement {
                        return SupportCone::Region(Angular::Full);
                    }
                    return SupportCone::Empty;
                }
                if complement {
                    SupportCone::Region(Angular::ConeComplement { axis: proj, cos_min: c })
                } else {
                    SupportCone::Region(Angular::Cone { axis: proj, cos_min: c })
                }
            }
            _ => {
                if complement {
                    SupportCone::Region(Angular::ConeComplement { axis: unit, cos_min })
                } else {
                    SupportCone::Region(Angular::Cone { axis: unit, cos_min })
                }
            }
        }
    }

    /// ∫_region g(z) μ_x(dz), with the region given in support coordinates
    /// and g evaluated at the ambient point z.
    pub fn integrate<G: FnMut(&[f64]) -> f64>(
        &self,
        x: &[f64],
        region: &Region,
        res: AngularResolution,
        cfg: &QuadratureConfig,
        mut g: G,
    ) -> Result<Integral> {
        let mut z = vec![0.0; self.dim];
        integrate(self.integration_dim(), region, res, cfg, |zeta| {
            self.embed(zeta, &mut z);
            let v = g(&z);
            if v == 0.0 {
                return 0.0;
            }
            let w = self.support_density(x, zeta);
            if w == 0.0 {
                0.0
            } else {
                v * w
            }
        })
    }

    /// ∫_region g(z) |μ_x − μ_y|(dz).
    pub fn integrate_abs_difference<G: FnMut(&[f64]) -> f64>(
        &self,
        x: &[f64],
        y: &[f64],
        region: &Region,
        res: AngularResolution,
        cfg: &QuadratureConfig,
        mut g: G,
    ) -> Result<Integral> {
        if self.is_x_independent() {
            return Ok(Integral { value: 0.0, error: 0.0, cells: 0 });
        }
        let mut z = vec![0.0; self.dim];
        integrate(self.integration_dim(), region, res, cfg, |zeta| {
            self.embed(zeta, &mut z);
            let v = g(&z);
            if v == 0.0 {
                return 0.0;
            }
            let w = (self.support_density(x, zeta) - self.support_density(y, zeta)).abs();
            if w == 0.0 {
                0.0
            } else {
                v * w
            }
        })
    }

    /// ∫_B |z|² μ_x + μ_x(B^c), the (M1) integral at x.
    pub fn m1_integral(&self, x: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
        let res = AngularResolution::Fixed(64);
        let inner = self.integrate(x, &Region::ball(1.0), res, cfg, |z| z.iter().map(|v| v * v).sum())?;
        Ok(inner.value + self.tail_mass(x, 1.0, cfg)?)
    }

    /// μ_x(|z| > r), integrated with one radial panel per dyadic cell.
    pub fn tail_mass(&self, x: &[f64], r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let mut coarse = cfg.clone();
        coarse.panel_length = f64::INFINITY;
        Ok(self.integrate(x, &Region::exterior(r), AngularResolution::Fixed(64), &coarse, |_| 1.0)?.value)
    }

    /// Supremum of the (M1) integral over the given points (exact for
    /// x-independent kernels).
    pub fn m1_constant(&self, points: &[Vec<f64>], cfg: &QuadratureConfig) -> Result<f64> {
        if self.is_x_independent() || points.is_empty() {
            return self.m1_integral(&vec![0.0; self.dim], cfg);
        }
        let mut best: f64 = 0.0;
        for p in points {
            best = best.max(self.m1_integral(p, cfg)?);
        }
        Ok(best)
    }
}
