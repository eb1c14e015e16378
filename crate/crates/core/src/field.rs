//! Scalar coefficient fields x ↦ c(x).

use crate::expr::Expr;
use std::fmt;
use std::sync::Arc;

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ScalarField {
    Const(f64),
    Expr(Expr),
    Func(PointFn),
}

impl ScalarField {
    pub fn func(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Func(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Const(c) => *c,
            ScalarField::Expr(e) => e.eval(x, &[]),
            ScalarField::Func(f) => f(x),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            ScalarField::Const(c) => Some(*c),
            ScalarField::Expr(e) if e.is_constant() => Some(e.eval(&[], &[])),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::Const(c)
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::Expr(e)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Const(c) => write!(f, "Const({c})"),
            ScalarField::Expr(e) => write!(f, "Expr({})", e.source()),
            ScalarField::Func(_) => f.write_str("Func(..)"),
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Const(c) => write!(f, "{c}"),
            ScalarField::Expr(e) => f.write_str(e.source()),
            ScalarField::Func(_) => f.write_str("<function>"),
        }
    }
}
