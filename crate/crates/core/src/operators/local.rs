//! Finite-difference jets at lattice points.

use crate::grid::GridFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalJet {
    /// Centered first differences.
    pub gradient: Vec<f64>,
    /// Forward differences (u(x+h e_k) − u(x))/h.
    pub forward: Vec<f64>,
    /// Backward differences (u(x) − u(x−h e_k))/h.
    pub backward: Vec<f64>,
    /// Row-major d×d Hessian from second differences.
    pub hessian: Vec<Vec<f64>>,
    /// Δ_{x1}u.
    pub laplacian1: f64,
    /// Δ_{x2}u.
    pub laplacian2: f64,
}

impl LocalJet {
    pub fn laplacian(&self) -> f64 {
        self.laplacian1 + self.laplacian2
    }
}

/// Jet of `u` at the lattice point with flat index `flat`.
pub fn eval_local(u: &GridFunction, flat: usize) -> LocalJet {
    let g = &u.geometry;
    let d = g.d();
    let h = g.h();
    let v = &u.values;
    let u0 = v[flat];
    let mut gradient = vec![0.0; d];
    let mut forward = vec![0.0; d];
    let mut backward = vec![0.0; d];
    let mut hessian = vec![vec![0.0; d]; d];
    for k in 0..d {
        let up = v[g.neighbor(flat, k, 1)];
        let dn = v[g.neighbor(flat, k, -1)];
        gradient[k] = (up - dn) / (2.0 * h);
        forward[k] = (up - u0) / h;
        backward[k] = (u0 - dn) / h;
        hessian[k][k] = (up - 2.0 * u0 + dn) / (h * h);
        for l in 0..k {
            let pp = v[g.neighbor(g.neighbor(flat, k, 1), l, 1)];
            let pm = v[g.neighbor(g.neighbor(flat, k, 1), l, -1)];
            let mp = v[g.neighbor(g.neighbor(flat, k, -1), l, 1)];
            let mm = v[g.neighbor(g.neighbor(flat, k, -1), l, -1)];
            let m = (pp - pm - mp + mm) / (4.0 * h * h);
            hessian[k][l] = m;
            hessian[l][k] = m;
        }
    }
    let laplacian1 = (0..g.d1).map(|k| hessian[k][k]).sum();
    let laplacian2 = (g.d1..d).map(|k| hessian[k][k]).sum();
    LocalJet { gradient, forward, backward, hessian, laplacian1, laplacian2 }
}
