//! Nonlocal, Lévy–Itô, directional and local operators on periodic grid
//! functions.
//!
//! All nonlocal evaluators return the integral I itself; the fractional
//! Laplacian of the isotropic kernel is −I.

mod local;
mod nonlocal;
mod spectral;

pub use local::{eval_local, LocalJet};
pub use nonlocal::{apply_nonlocal, eval_directional, eval_levy_ito, eval_nonlocal, far_mass};
pub use spectral::{fractional_laplacian_spectral, SpectralMultiplier};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Truncation radius δ of the split I¹_δ + I²_δ and an optional vector p
/// replacing the gradient in I²_δ.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub delta: f64,
    pub gradient_override: Option<Vec<f64>>,
}

impl SplitSpec {
    pub fn new(delta: f64) -> Result<SplitSpec> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("split radius {delta} outside (0, 1)")));
        }
        Ok(SplitSpec { delta, gradient_override: None })
    }

    pub fn with_gradient(mut self, p: Vec<f64>) -> SplitSpec {
        self.gradient_override = Some(p);
        self
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { delta: 0.1, gradient_override: None }
    }
}

/// Discretization parameters of the direct quadrature evaluators.
#[derive(Debug, Clone)]
pub struct OperatorQuadrature {
    pub cfg: QuadratureConfig,
    /// Radius of the Taylor ball in units of h.
    pub taylor_cells: f64,
    /// Radius beyond which u(x+z) is replaced by its slice mean; None picks
    /// a default by dimension.
    pub far_radius: Option<f64>,
    /// Arc length between angular nodes.
    pub arc_spacing: f64,
}

impl Default for OperatorQuadrature {
    fn default() -> Self {
        OperatorQuadrature { cfg: QuadratureConfig::default(), taylor_cells: 2.0, far_radius: None, arc_spacing: 0.025 }
    }
}

impl OperatorQuadrature {
    pub fn far_radius_for(&self, dim: usize) -> f64 {
        self.far_radius.unwrap_or(match dim {
            1 => 64.0,
            2 => 4.0,
            _ => 2.0,
        })
    }
}
