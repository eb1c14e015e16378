//! Concave test functions φ for the doubling-variables argument.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiFamily {
    /// φ(t) = L·t^α.
    Holder,
    /// φ(t) = L(t − ρ·t^{1+α}).
    LipschitzRegularized,
}

/// φ on [0, t0], constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunctionPhi {
    pub family: PhiFamily,
    pub l: f64,
    pub alpha: f64,
    pub rho: f64,
    pub t0: f64,
}

fn check_common(l: f64, alpha: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidInput(format!("L = {l} must be positive")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(())
}

impl TestFunctionPhi {
    /// `t0 = INFINITY` gives the untruncated power.
    pub fn holder(l: f64, alpha: f64, t0: f64) -> Result<TestFunctionPhi> {
        check_common(l, alpha)?;
        if !(t0 > 0.0) {
            return Err(Error::InvalidInput(format!("t0 = {t0} must be positive")));
        }
        let phi = TestFunctionPhi { family: PhiFamily::Holder, l, alpha, rho: 0.0, t0 };
        phi.check_shape(1000)?;
        Ok(phi)
    }

    /// φ(t) = L·t.
    pub fn linear(l: f64) -> Result<TestFunctionPhi> {
        Self::holder(l, 1.0, f64::INFINITY)
    }

    /// Requires ρα2^{α−1} > 1; t0 = (ρ(1+α))^{−1/α} is where φ′ vanishes.
    pub fn lipschitz(l: f64, alpha: f64, rho: f64) -> Result<TestFunctionPhi> {
        check_common(l, alpha)?;
        if !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("rho = {rho} must be positive")));
        }
        let c = rho * alpha * 2f64.powf(alpha - 1.0);
        if c <= 1.0 {
            return Err(Error::InvalidInput(format!("rho*alpha*2^(alpha-1) = {c} must exceed 1")));
        }
        let t0 = (1.0 / (rho * (1.0 + alpha))).powf(1.0 / alpha);
        let phi = TestFunctionPhi { family: PhiFamily::LipschitzRegularized, l, alpha, rho, t0 };
        phi.check_shape(1000)?;
        Ok(phi)
    }

    pub fn with_l(mut self, l: f64) -> Result<TestFunctionPhi> {
        check_common(l, self.alpha)?;
        self.l = l;
        Ok(self)
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = t.max(0.0).min(self.t0);
        match self.family {
            PhiFamily::Holder => self.l * t.powf(self.alpha),
            PhiFamily::LipschitzRegularized => self.l * (t - self.rho * t.powf(1.0 + self.alpha)),
        }
    }

    /// φ′(t), zero from t0 on.
    pub fn d1(&self, t: f64) -> f64 {
        if t >= self.t0 {
            return 0.0;
        }
        let a = self.alpha;
        match self.family {
            PhiFamily::Holder => self.l * a * t.powf(a - 1.0),
            PhiFamily::LipschitzRegularized => self.l * (1.0 - self.rho * (1.0 + a) * t.powf(a)),
        }
    }

    /// φ″(t), zero from t0 on.
    pub fn d2(&self, t: f64) -> f64 {
        if t >= self.t0 {
            return 0.0;
        }
        let a = self.alpha;
        match self.family {
            PhiFamily::Holder => self.l * a * (a - 1.0) * t.powf(a - 2.0),
            PhiFamily::LipschitzRegularized => -self.l * self.rho * (1.0 + a) * a * t.powf(a - 1.0),
        }
    }

    /// φ′ > 0 and φ″ ≤ 0 at `points` interior points of (0, t0) (of (0, 1)
    /// when t0 is infinite).
    pub fn check_shape(&self, points: usize) -> Result<()> {
        let top = if self.t0.is_finite() { self.t0 } else { 1.0 };
        for k in 1..=points {
            let t = top * k as f64 / (points + 1) as f64;
            let (d1, d2) = (self.d1(t), self.d2(t));
            if !(d1 > 0.0) || d2 > 0.0 {
                return Err(Error::InvalidInput(format!("{self} is not increasing and concave at t = {t}: phi' = {d1}, phi'' = {d2}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TestFunctionPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            PhiFamily::Holder => write!(f, "holder(L={},alpha={},t0={})", self.l, self.alpha, self.t0),
            PhiFamily::LipschitzRegularized => {
                write!(f, "lipschitz(L={},alpha={},rho={},t0={})", self.l, self.alpha, self.rho, self.t0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_constraints() {
        let phi = TestFunctionPhi::lipschitz(1.0, 0.5, 3.0).unwrap();
        assert!((phi.t0 - (1.0f64 / 4.5).powi(2)).abs() < 1e-15);
        assert!((phi.t0 - 0.049383).abs() < 1e-6);
        assert!(phi.d1(phi.t0 * (1.0 - 1e-9)).abs() < 1e-6);
        assert!(matches!(TestFunctionPhi::lipschitz(1.0, 0.5, 2.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn holder_is_constant_after_t0() {
        let phi = TestFunctionPhi::holder(2.0, 0.5, 0.25).unwrap();
        assert_eq!(phi.value(0.25), 1.0);
        assert_eq!(phi.value(0.4), 1.0);
        assert_eq!(phi.d1(0.3), 0.0);
        assert!((phi.d1(0.04) - 5.0).abs() < 1e-12);
        assert!(phi.d2(0.04) < 0.0);
    }

    #[test]
    fn linear_has_zero_curvature() {
        let phi = TestFunctionPhi::linear(1.5).unwrap();
        assert_eq!(phi.value(0.3), 0.3 * 1.5);
        assert_eq!(phi.d2(0.3), 0.0);
        assert!(TestFunctionPhi::holder(1.0, 1.2, 1.0).is_err());
    }
}
