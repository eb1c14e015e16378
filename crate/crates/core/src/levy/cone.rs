//! Cones C_{η,δ}(a) = {|z| ≤ δ, (1−η)|z| ≤ |â·z|} and the masses ∫_C |z|² μ.

use super::kernel::{LevyKernel, SupportCone};
use crate::error::{Error, Result};
use crate::quadrature::{AngularResolution, QuadratureConfig, Region};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    pub axis: Vec<f64>,
    pub eta: f64,
    pub delta: f64,
}

impl ConeSpec {
    /// `axis` need not be normalized. `eta = 1` gives the whole ball.
    pub fn new(axis: &[f64], eta: f64, delta: f64) -> Result<ConeSpec> {
        let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("cone axis must be a nonzero vector".into()));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidInput(format!("eta = {eta} outside [0, 1]")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta = {delta} must be positive")));
        }
        Ok(ConeSpec { axis: axis.iter().map(|v| v / n).collect(), eta, delta })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let p: f64 = z.iter().zip(&self.axis).map(|(a, b)| a * b).sum();
        r <= self.delta && (1.0 - self.eta) * r <= p.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMass {
    pub value: f64,
    pub error: f64,
    /// The cone does not meet the support of the measure.
    pub degenerate: bool,
}

/// ∫_{C_{η,δ}(a)} |z|² μ_x(dz).
pub fn cone_mass_at(kernel: &LevyKernel, x: &[f64], cone: &ConeSpec, cfg: &QuadratureConfig) -> Result<ConeMass> {
    if cone.axis.len() != kernel.dim {
        return Err(Error::InvalidInput(format!(
            "cone axis dimension {} differs from kernel dimension {}",
            cone.axis.len(),
            kernel.dim
        )));
    }
    if cone.delta > kernel.tail_radius {
        return Err(Error::InvalidInput(format!(
            "cone radius {} exceeds tail radius {}",
            cone.delta, kernel.tail_radius
        )));
    }
    let angular = match kernel.support_cone(&cone.axis, 1.0 - cone.eta, false) {
        SupportCone::Empty => return Ok(ConeMass { value: 0.0, error: 0.0, degenerate: true }),
        SupportCone::Region(a) => a,
    };
    let region = Region::ball(cone.delta).with_angular(angular);
    let r = kernel.integrate(x, &region, AngularResolution::Fixed(64), cfg, |z| z.iter().map(|v| v * v).sum())?;
    Ok(ConeMass { value: r.value.max(0.0), error: r.error, degenerate: false })
}

/// cone_mass_at the origin.
pub fn cone_mass(kernel: &LevyKernel, cone: &ConeSpec) -> Result<ConeMass> {
    cone_mass_at(kernel, &vec![0.0; kernel.dim], cone, &QuadratureConfig::default())
}

/// Closed form of ∫_{C_{η,δ}} |z|^{2−d−β} dz for d ∈ {2, 3} (double cone).
pub fn cone_constant_example(d: usize, beta: f64, eta: f64, delta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 2)")));
    }
    if !(0.0..=1.0).contains(&eta) || !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("eta = {eta}, delta = {delta} out of range")));
    }
    let radial = delta.powf(2.0 - beta) / (2.0 - beta);
    let angular = match d {
        2 => 4.0 * (1.0 - eta).acos(),
        3 => 4.0 * PI * eta,
        _ => return Err(Error::InvalidInput(format!("d = {d} not in {{2, 3}}"))),
    };
    Ok(angular * radial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ball_values() {
        let k = LevyKernel::fractional(2, 1.0).unwrap();
        let c = cone_mass(&k, &ConeSpec::new(&[1.0, 0.0], 1.0, 1.0).unwrap()).unwrap();
        assert!((c.value - 2.0 * PI).abs() < 1e-8);
        let c = cone_mass(&k, &ConeSpec::new(&[1.0, 0.0], 1.0, 0.5).unwrap()).unwrap();
        assert!((c.value - PI).abs() < 1e-8);
    }

    #[test]
    fn example_values() {
        assert!((cone_constant_example(2, 1.0, 1.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        let v = cone_constant_example(2, 0.5, 0.1, 1.0).unwrap();
        assert!((v - 4.0 * 0.9f64.acos() / 1.5).abs() < 1e-14);
        assert!((v - 1.2027).abs() < 1e-4);
        assert_eq!(cone_constant_example(2, 1.0, 0.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn directional_orthogonal_axis_is_degenerate() {
        let k = LevyKernel::directional(2, 1.0, vec![1]).unwrap();
        let c = cone_mass(&k, &ConeSpec::new(&[1.0, 0.0], 0.5, 1.0).unwrap()).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.value, 0.0);
        let c = cone_mass(&k, &ConeSpec::new(&[0.0, 1.0], 0.5, 1.0).unwrap()).unwrap();
        assert!(!c.degenerate);
        assert!((c.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn three_dimensional_cone() {
        let k = LevyKernel::fractional(3, 1.3).unwrap();
        let axis = [0.2, -0.5, 0.8];
        let c = cone_mass(&k, &ConeSpec::new(&axis, 0.2, 0.7).unwrap()).unwrap();
        let exact = cone_constant_example(3, 1.3, 0.2, 0.7).unwrap();
        assert!((c.value - exact).abs() < 1e-8 * exact);
    }
}
