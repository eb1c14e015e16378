//! Symmetric matrices, the block inequality
//! diag(X, −Y) ≤ [[Z, −Z], [−Z, Z]], sup/inf-convolution of quadratic forms
//! and the trace estimate.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use std::fmt;

/// Threshold below which a smallest eigenvalue counts as negative.
pub const PSD_TOL: f64 = 1e-9;

/// Symmetric matrix stored as its packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn zeros(dim: usize) -> SymMatrix {
        SymMatrix { dim, data: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> SymMatrix {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Reads entries (i, j) with i ≤ j.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> SymMatrix {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let s = m.slot(i, j);
                m.data[s] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> SymMatrix {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// From full rows; asymmetry beyond 1e-12 (relative) is rejected.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymMatrix> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("matrix rows must form a square".into()));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(d, |i, j| rows[i][j]))
    }

    /// a ⊗ a.
    pub fn outer(a: &[f64]) -> SymMatrix {
        Self::from_fn(a.len(), |i, j| a[i] * a[j])
    }

    /// Symmetric part of a square nalgebra matrix.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> SymMatrix {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        SymMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Az·z.
    pub fn quad(&self, z: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.get(i, i) * z[i] * z[i];
            for j in i + 1..self.dim {
                s += 2.0 * self.get(i, j) * z[i] * z[j];
            }
        }
        s
    }

    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * z[j]).sum()).collect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut v: Vec<f64> = self.to_dmatrix().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// max_{|ξ|≤1} |Aξ·ξ|.
    pub fn norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies f to every eigenvalue.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        if self.dim == 0 {
            return self.clone();
        }
        let e = self.to_dmatrix().symmetric_eigen();
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (k, lambda) in e.eigenvalues.iter().enumerate() {
            let v = e.eigenvectors.column(k);
            m += (v * v.transpose()) * f(*lambda);
        }
        Self::from_dmatrix(&m)
    }

    /// Largest absolute entry of the difference.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Principal submatrix on rows and columns lo..hi.
    pub fn block(&self, lo: usize, hi: usize) -> SymMatrix {
        Self::from_fn(hi - lo, |i, j| self.get(lo + i, lo + j))
    }

    pub fn block_diag(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
        let (p, q) = (a.dim, b.dim);
        Self::from_fn(p + q, |i, j| {
            if j < p {
                a.get(i, j)
            } else if i >= p {
                b.get(i - p, j - p)
            } else {
                0.0
            }
        })
    }

    /// Largest entry coupling the first d1 coordinates with the rest.
    pub fn off_block(&self, d1: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..d1.min(self.dim) {
            for j in d1..self.dim {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }
}

impl fmt::Display for SymMatrix {
    /// One row per line, entries in `{:+.12e}` separated by spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{:+.12e}", self.get(i, j))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// (X, Y, Z) on R^{d1} × R^{d2}.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTriple {
    pub x: SymMatrix,
    pub y: SymMatrix,
    pub z: SymMatrix,
    pub d1: usize,
    pub d2: usize,
}

impl BlockTriple {
    pub fn new(x: SymMatrix, y: SymMatrix, z: SymMatrix, d1: usize, d2: usize) -> Result<BlockTriple> {
        let d = d1 + d2;
        if x.dim() != d || y.dim() != d || z.dim() != d {
            return Err(Error::InvalidInput(format!(
                "triple dimensions ({}, {}, {}) differ from d1 + d2 = {d}",
                x.dim(),
                y.dim(),
                z.dim()
            )));
        }
        Ok(BlockTriple { x, y, z, d1, d2 })
    }

    pub fn dim(&self) -> usize {
        self.d1 + self.d2
    }

    /// [[Z, −Z], [−Z, Z]] − diag(X, −Y).
    pub fn slack_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(2 * d, 2 * d, |i, j| {
            let (bi, bj) = (i / d, j / d);
            let z = self.z.get(i % d, j % d);
            let zz = if bi == bj { z } else { -z };
            let diag = if bi != bj {
                0.0
            } else if bi == 0 {
                self.x.get(i, j)
            } else {
                -self.y.get(i - d, j - d)
            };
            zz - diag
        })
    }
}

/// Smallest eigenvalue of [[Z, −Z], [−Z, Z]] − diag(X, −Y); the inequality
/// holds when it is ≥ −PSD_TOL.
pub fn check_block_inequality(t: &BlockTriple) -> f64 {
    if t.dim() == 0 {
        return f64::INFINITY;
    }
    t.slack_matrix().symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, v| m.min(*v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockExtraction {
    /// Sub-triples of the nonempty blocks with their margins.
    pub blocks: Vec<(BlockTriple, f64)>,
}

/// Restricts a block-diagonal triple to each coordinate block.
pub fn extract_blocks(t: &BlockTriple) -> Result<BlockExtraction> {
    for (name, m) in [("X", &t.x), ("Y", &t.y), ("Z", &t.z)] {
        let off = m.off_block(t.d1);
        if off > 1e-12 {
            return Err(Error::InvalidInput(format!("{name} is not block diagonal (off-block entry {off:e})")));
        }
    }
    let d = t.dim();
    let mut blocks = Vec::new();
    for (lo, hi) in [(0, t.d1), (t.d1, d)] {
        if hi == lo {
            continue;
        }
        let sub = BlockTriple::new(t.x.block(lo, hi), t.y.block(lo, hi), t.z.block(lo, hi), hi - lo, 0)?;
        let m = check_block_inequality(&sub);
        blocks.push((sub, m));
    }
    Ok(BlockExtraction { blocks })
}

/// Matrix of z ↦ sup_ξ {Xξ·ξ − |z−ξ|²/ε}: eigenvalues λ ↦ λ/(1−ελ).
pub fn sup_convolve(x: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    let product = eps * x.max_eigenvalue();
    if product >= 1.0 {
        return Err(Error::DivergentConvolution { product });
    }
    Ok(x.map_eigenvalues(|l| l / (1.0 - eps * l)))
}

/// Matrix of z ↦ inf_ξ {Yξ·ξ + |z−ξ|²/ε}, equal to −sup_convolve(−Y, ε).
pub fn inf_convolve(y: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    Ok(sup_convolve(&y.scale(-1.0), eps)?.scale(-1.0))
}

/// sup_ξ {Xξ·ξ − |z−ξ|²/ε} by solving the stationarity system
/// (I − εX)ξ = z directly.
pub fn sup_convolve_direct(x: &SymMatrix, eps: f64, z: &[f64]) -> Result<f64> {
    let d = x.dim();
    let a = SymMatrix::identity(d).sub(&x.scale(eps));
    let chol = a.to_dmatrix().cholesky().ok_or(Error::DivergentConvolution { product: eps * x.max_eigenvalue() })?;
    let xi = chol.solve(&nalgebra::DVector::from_column_slice(z));
    let xi: Vec<f64> = xi.iter().copied().collect();
    let dist: f64 = xi.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(x.quad(&xi) - dist / eps)
}

/// (max(‖X‖, ‖Y‖, 2‖Z‖))^{-1}.
pub fn epsilon0(t: &BlockTriple) -> f64 {
    1.0 / t.x.norm().max(t.y.norm()).max(2.0 * t.z.norm())
}

/// (X^ε, Y_ε, Z^{2ε}).
pub fn convolve_triple(t: &BlockTriple, eps: f64) -> Result<BlockTriple> {
    BlockTriple::new(sup_convolve(&t.x, eps)?, inf_convolve(&t.y, eps)?, sup_convolve(&t.z, 2.0 * eps)?, t.d1, t.d2)
}

fn unit(axis: &[f64]) -> Result<Vec<f64>> {
    let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidInput("axis must be a nonzero vector".into()));
    }
    Ok(axis.iter().map(|v| v / n).collect())
}

/// Z = (1/α)(I − ω â⊗â).
pub fn quadratic_z(alpha: f64, omega: f64, axis: &[f64]) -> Result<SymMatrix> {
    let a = unit(axis)?;
    Ok(SymMatrix::identity(a.len()).sub(&SymMatrix::outer(&a).scale(omega)).scale(1.0 / alpha))
}

/// Closed form of Z^{α/2}: (2/α)(I − (2ω/(1+ω)) â⊗â).
pub fn conv_closed_form(alpha: f64, omega: f64, axis: &[f64]) -> Result<SymMatrix> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be positive")));
    }
    if !(omega >= 0.0) {
        return Err(Error::InvalidInput(format!("omega = {omega} must be nonnegative")));
    }
    let a = unit(axis)?;
    let c = 2.0 * omega / (1.0 + omega);
    Ok(SymMatrix::identity(a.len()).sub(&SymMatrix::outer(&a).scale(c)).scale(2.0 / alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    pub bound: f64,
    pub trace: f64,
    pub satisfied: bool,
    /// Block-inequality margin of (X, Y, Z^{α/2}).
    pub margin: f64,
}

/// −8(ω−1)/(α(1+ω)).
pub fn trace_bound(alpha: f64, omega: f64) -> f64 {
    -8.0 * (omega - 1.0) / (alpha * (1.0 + omega))
}

/// Checks trace(X − Y) ≤ −8(ω−1)/(α(1+ω)) for (X, Y, Z^{α/2}) satisfying the
/// block inequality.
pub fn trace_bound_check(x: &SymMatrix, y: &SymMatrix, alpha: f64, omega: f64, axis: &[f64]) -> Result<TraceCheck> {
    if !(omega >= 1.0) {
        return Err(Error::InvalidInput(format!("omega = {omega} must be at least 1")));
    }
    let zc = conv_closed_form(alpha, omega, axis)?;
    let d = zc.dim();
    let t = BlockTriple::new(x.clone(), y.clone(), zc, d, 0)?;
    let margin = check_block_inequality(&t);
    if margin < -PSD_TOL {
        return Err(Error::InvalidInput(format!("block inequality fails with margin {margin:e}")));
    }
    let bound = trace_bound(alpha, omega);
    let trace = x.trace() - y.trace();
    Ok(TraceCheck { bound, trace, satisfied: trace <= bound + PSD_TOL, margin })
}

/// X = −Y = (4/α)((1−ω)/(1+ω)) â⊗â, for which trace(X − Y) equals the bound.
pub fn tight_trace_instance(alpha: f64, omega: f64, axis: &[f64]) -> Result<(SymMatrix, SymMatrix)> {
    let a = unit(axis)?;
    let x = SymMatrix::outer(&a).scale(4.0 / alpha * (1.0 - omega) / (1.0 + omega));
    let y = x.scale(-1.0);
    Ok((x, y))
}

/// Symmetric matrix with entries uniform in [−scale, scale].
pub fn random_sym<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, rng.gen_range(-scale..=scale));
        }
    }
    m
}

/// BBᵀ for a random B; positive semidefinite, typically of full rank.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> SymMatrix {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-scale..=scale));
    SymMatrix::from_dmatrix(&(&b * b.transpose()))
}

/// Positive definite with eigenvalues at least `floor`.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64, floor: f64) -> SymMatrix {
    random_psd(rng, dim, scale).add(&SymMatrix::identity(dim).scale(floor))
}

/// X = Z − A and Y = ZA⁻¹Z − Z + E with A positive definite and E positive
/// semidefinite; the slack [[A, −Z], [−Z, ZA⁻¹Z + E]] is then PSD.
pub fn random_pair_for<R: Rng + ?Sized>(rng: &mut R, z: &SymMatrix) -> (SymMatrix, SymMatrix) {
    let d = z.dim();
    let a = random_pd(rng, d, 1.0, 0.05);
    let e = random_psd(rng, d, 0.5);
    let zm = z.to_dmatrix();
    let ainv = a.to_dmatrix().try_inverse().expect("positive definite matrix is invertible");
    let zaz = SymMatrix::from_dmatrix(&(&zm * ainv * &zm));
    (z.sub(&a), zaz.sub(z).add(&e))
}

/// Random triple satisfying the block inequality; block diagonal with
/// respect to d1 + d2 when `block_diagonal` is set.
pub fn random_valid_triple<R: Rng + ?Sized>(rng: &mut R, d1: usize, d2: usize, block_diagonal: bool) -> BlockTriple {
    if block_diagonal && d1 > 0 && d2 > 0 {
        let (x1, y1, z1) = {
            let t = random_valid_triple(rng, d1, 0, false);
            (t.x, t.y, t.z)
        };
        let (x2, y2, z2) = {
            let t = random_valid_triple(rng, d2, 0, false);
            (t.x, t.y, t.z)
        };
        return BlockTriple {
            x: SymMatrix::block_diag(&x1, &x2),
            y: SymMatrix::block_diag(&y1, &y2),
            z: SymMatrix::block_diag(&z1, &z2),
            d1,
            d2,
        };
    }
    let d = d1 + d2;
    let z = random_sym(rng, d, 1.0);
    let (x, y) = random_pair_for(rng, &z);
    BlockTriple { x, y, z, d1, d2 }
}
