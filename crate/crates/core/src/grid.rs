//! Periodic lattices on the torus [0,1)^d with the block split d = d1 + d2.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::{BufRead, Read, Write};

/// Coordinate block selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Full,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Block {
    pub fn label(self) -> &'static str {
        match self {
            Block::Full => "full",
            Block::One => "1",
            Block::Two => "2",
        }
    }

    pub fn parse(s: &str) -> Result<Block> {
        match s {
            "full" => Ok(Block::Full),
            "1" => Ok(Block::One),
            "2" => Ok(Block::Two),
            _ => Err(Error::InvalidInput(format!("unknown block '{s}' (expected full, 1 or 2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub d1: usize,
    pub d2: usize,
    pub n: usize,
}

impl Geometry {
    pub fn new(d1: usize, d2: usize, n: usize) -> Result<Geometry> {
        if d1 + d2 == 0 {
            return Err(Error::InvalidInput("dimension d1 + d2 must be at least 1".into()));
        }
        if d1 + d2 > 3 {
            return Err(Error::Unsupported(format!("dimension {} > 3", d1 + d2)));
        }
        if n < 8 {
            return Err(Error::InvalidInput(format!("n = {n} < 8")));
        }
        Ok(Geometry { d1, d2, n })
    }

    pub fn d(&self) -> usize {
        self.d1 + self.d2
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axis indices of a block.
    pub fn axes(&self, block: Block) -> std::ops::Range<usize> {
        match block {
            Block::Full => 0..self.d(),
            Block::One => 0..self.d1,
            Block::Two => self.d1..self.d(),
        }
    }

    pub fn block_dim(&self, block: Block) -> usize {
        self.axes(block).len()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d() - 1 - axis) as u32)
    }

    /// Row-major flat index to multi-index.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for k in (0..self.d()).rev() {
            idx[k] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for k in 0..self.d() {
            f = f * self.n + idx[k] % self.n;
        }
        f
    }

    /// Flat index of the neighbour at offset `delta` along `axis`.
    pub fn neighbor(&self, flat: usize, axis: usize, delta: isize) -> usize {
        let s = self.stride(axis);
        let i = (flat / s) % self.n;
        let j = (i as isize + delta).rem_euclid(self.n as isize) as usize;
        flat - i * s + j * s
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let idx = self.unravel(flat);
        (0..self.d()).map(|k| idx[k] as f64 * self.h()).collect()
    }

    /// Minimal-image difference x - y on the torus, componentwise in [-1/2, 1/2).
    pub fn torus_delta(x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| wrap_half(a - b)).collect()
    }

    pub fn torus_dist(x: &[f64], y: &[f64]) -> f64 {
        Self::torus_delta(x, y).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Reduces t modulo 1 into [-1/2, 1/2).
pub fn wrap_half(t: f64) -> f64 {
    t - (t + 0.5).floor()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub geometry: Geometry,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(geometry: Geometry, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidInput(format!("expected {} values, got {}", geometry.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at index {i}")));
        }
        Ok(GridFunction { geometry, values })
    }

    pub fn zeros(geometry: Geometry) -> GridFunction {
        GridFunction { geometry, values: vec![0.0; geometry.len()] }
    }

    pub fn constant(geometry: Geometry, c: f64) -> GridFunction {
        GridFunction { geometry, values: vec![c; geometry.len()] }
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64 + Sync>(geometry: Geometry, f: F) -> GridFunction {
        let values = (0..geometry.len()).into_par_iter().map(|i| f(&geometry.coords(i))).collect();
        GridFunction { geometry, values }
    }

    pub fn d(&self) -> usize {
        self.geometry.d()
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.geometry.ravel(idx)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { geometry: self.geometry, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.same_geometry(other)?;
        Ok(GridFunction {
            geometry: self.geometry,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn same_geometry(&self, other: &GridFunction) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch(format!("{:?} vs {:?}", self.geometry, other.geometry)));
        }
        Ok(())
    }

    /// Field y ↦ u(y - shift·h) for an integer lattice shift.
    pub fn shifted(&self, shift: &[isize]) -> GridFunction {
        let g = self.geometry;
        let n = g.n as isize;
        let values = (0..g.len())
            .map(|i| {
                let idx = g.unravel(i);
                let mut src = [0usize; 3];
                for k in 0..g.d() {
                    src[k] = (idx[k] as isize - shift[k]).rem_euclid(n) as usize;
                }
                self.values[g.ravel(&src)]
            })
            .collect();
        GridFunction { geometry: g, values }
    }

    /// Multilinear periodic interpolation at an arbitrary point.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let g = &self.geometry;
        let d = g.d();
        let n = g.n;
        let nf = n as f64;
        let mut base = [0usize; 3];
        let mut next = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..d {
            let s = x[k] * nf;
            let fl = s.floor();
            let t = s - fl;
            let i0 = (fl as i64).rem_euclid(n as i64) as usize;
            base[k] = i0;
            next[k] = if i0 + 1 == n { 0 } else { i0 + 1 };
            frac[k] = t;
        }
        match d {
            1 => {
                let (a, b) = (self.values[base[0]], self.values[next[0]]);
                a + frac[0] * (b - a)
            }
            2 => {
                let r0 = base[0] * n;
                let r1 = next[0] * n;
                let v00 = self.values[r0 + base[1]];
                let v01 = self.values[r0 + next[1]];
                let v10 = self.values[r1 + base[1]];
                let v11 = self.values[r1 + next[1]];
                let a = v00 + frac[1] * (v01 - v00);
                let b = v10 + frac[1] * (v11 - v10);
                a + frac[0] * (b - a)
            }
            _ => {
                let mut acc = 0.0;
                for corner in 0..(1usize << d) {
                    let mut w = 1.0;
                    let mut flat = 0;
                    for k in 0..d {
                        let hi = (corner >> (d - 1 - k)) & 1 == 1;
                        w *= if hi { frac[k] } else { 1.0 - frac[k] };
                        flat = flat * n + if hi { next[k] } else { base[k] };
                    }
                    acc += w * self.values[flat];
                }
                acc
            }
        }
    }

    /// Mean of the interpolated field over the affine subtorus through `x`
    /// spanned by the listed axes.
    pub fn slice_mean(&self, x: &[f64], axes: &[usize]) -> f64 {
        if axes.len() == self.d() {
            return self.mean();
        }
        let n = self.geometry.n;
        let count = n.pow(axes.len() as u32);
        let mut p = x.to_vec();
        let mut vals = Vec::with_capacity(count);
        for c in 0..count {
            let mut r = c;
            for &ax in axes.iter().rev() {
                p[ax] = (r % n) as f64 / n as f64;
                r /= n;
            }
            vals.push(self.interpolate(&p));
        }
        pairwise_sum(&vals) / count as f64
    }

    /// CSV form: geometry header, then one value per line in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "d1,d2,n")?;
        writeln!(w, "{},{},{}", self.geometry.d1, self.geometry.d2, self.geometry.n)?;
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of field file".into()))?
                .map_err(|e| Error::Parse(e.to_string()))
        };
        if next()?.trim() != "d1,d2,n" {
            return Err(Error::Parse("missing geometry header".into()));
        }
        let geo: Vec<usize> = next()?
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        if geo.len() != 3 {
            return Err(Error::Parse("geometry row must have 3 entries".into()));
        }
        let g = Geometry::new(geo[0], geo[1], geo[2])?;
        if next()?.trim() != "value" {
            return Err(Error::Parse("missing value header".into()));
        }
        let mut values = Vec::with_capacity(g.len());
        for _ in 0..g.len() {
            values.push(next()?.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
        GridFunction::new(g, values)
    }

    /// Binary form, all integers and floats little-endian:
    /// magic `MIDEGRID`, u32 version (1), u32 d1, u32 d2, u32 n, then n^d f64 values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"MIDEGRID")?;
        for v in [1u32, self.geometry.d1 as u32, self.geometry.d2 as u32, self.geometry.n as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<GridFunction> {
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != b"MIDEGRID" {
            return Err(Error::Parse("bad magic".into()));
        }
        let mut hdr = [0u32; 4];
        for h in hdr.iter_mut() {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(io)?;
            *h = u32::from_le_bytes(b);
        }
        if hdr[0] != 1 {
            return Err(Error::Parse(format!("unsupported version {}", hdr[0])));
        }
        let g = Geometry::new(hdr[1] as usize, hdr[2] as usize, hdr[3] as usize)?;
        let mut values = Vec::with_capacity(g.len());
        for _ in 0..g.len() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            values.push(f64::from_le_bytes(b));
        }
        GridFunction::new(g, values)
    }
}

/// Pairwise summation with a fixed reduction tree.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
