//! Lévy–Itô jump maps j(x, z).

use crate::error::{Error, Result};
use crate::expr::Expr;
use std::fmt;
use std::sync::Arc;

pub type JumpFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum JumpMap {
    Identity,
    /// z ↦ s·z.
    Scaled(f64),
    /// One expression per output component.
    Exprs(Vec<Expr>),
    Func(JumpFn),
}

impl fmt::Debug for JumpMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpMap::Identity => f.write_str("Identity"),
            JumpMap::Scaled(s) => write!(f, "Scaled({s})"),
            JumpMap::Exprs(e) => {
                let s: Vec<&str> = e.iter().map(|x| x.source()).collect();
                write!(f, "Exprs({s:?})")
            }
            JumpMap::Func(_) => f.write_str("Func(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JumpFunction {
    pub dim: usize,
    pub map: JumpMap,
    pub c0: f64,
    pub big_c0: f64,
    pub gamma: f64,
    pub tail_lipschitz: f64,
}

impl JumpFunction {
    pub fn new(dim: usize, map: JumpMap, c0: f64, big_c0: f64, gamma: f64, tail_lipschitz: f64) -> Result<JumpFunction> {
        if c0 <= 0.0 || big_c0 < c0 {
            return Err(Error::InvalidInput(format!("need 0 < c0 <= C0, got c0 = {c0}, C0 = {big_c0}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidInput(format!("gamma = {gamma} outside (0, 1]")));
        }
        if tail_lipschitz < 0.0 {
            return Err(Error::InvalidInput("tail_lipschitz must be nonnegative".into()));
        }
        if let JumpMap::Exprs(e) = &map {
            if e.len() != dim {
                return Err(Error::InvalidInput(format!("{} jump components for dimension {dim}", e.len())));
            }
            for c in e {
                c.check_dims(3, dim)?;
            }
        }
        Ok(JumpFunction { dim, map, c0, big_c0, gamma, tail_lipschitz })
    }

    pub fn identity(dim: usize) -> JumpFunction {
        JumpFunction { dim, map: JumpMap::Identity, c0: 1.0, big_c0: 1.0, gamma: 1.0, tail_lipschitz: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.map, JumpMap::Identity) || matches!(self.map, JumpMap::Scaled(s) if s == 1.0)
    }

    pub fn is_x_independent(&self) -> bool {
        match &self.map {
            JumpMap::Identity | JumpMap::Scaled(_) => true,
            JumpMap::Exprs(e) => e.iter().all(|c| c.max_x_index() == 0),
            JumpMap::Func(_) => false,
        }
    }

    pub fn eval_into(&self, x: &[f64], z: &[f64], out: &mut [f64]) {
        match &self.map {
            JumpMap::Identity => out.copy_from_slice(z),
            JumpMap::Scaled(s) => {
                for (o, v) in out.iter_mut().zip(z) {
                    *o = s * v;
                }
            }
            JumpMap::Exprs(e) => {
                for (o, c) in out.iter_mut().zip(e) {
                    *o = c.eval(x, z);
                }
            }
            JumpMap::Func(f) => f(x, z, out),
        }
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, z, &mut out);
        out
    }
}
