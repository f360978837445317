//! Closed-form real functions of one variable: parsing, evaluation,
//! symbolic differentiation, composition and numerical inversion.

mod diff;
mod expr;
mod grid;
mod invert;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

pub use diff::differentiate;
pub use expr::{real_pow, Expr, Func, Node};
pub use grid::GridFn;
pub use invert::{invert_with, MAX_ITER, TOL_ROOT};
pub use parse::parse;

use crate::{Error, Result};

pub type Params = BTreeMap<String, f64>;

/// Open interval (a, b); either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Interval> {
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(Error::Input(format!("interval ({a}, {b}) is empty")));
        }
        Ok(Interval { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

/// Anything that can be sampled pointwise.
pub trait RealFn: Send + Sync {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Send + Sync> RealFn for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A parsed expression with its parameters bound and a domain attached.
#[derive(Clone, Debug)]
pub struct ExprFn {
    expr: Expr,
    domain: Interval,
}

impl ExprFn {
    pub fn parse(source: &str, params: &Params, domain: Interval) -> Result<ExprFn> {
        let raw = parse(source)?;
        let bound = raw.bind(&|name| params.get(name).copied())?;
        Ok(ExprFn { expr: bound, domain })
    }

    /// Wrap an expression; it must not contain unbound parameters.
    pub fn new(expr: Expr, domain: Interval) -> Result<ExprFn> {
        if let Some(name) = expr.free_params().into_iter().next() {
            return Err(Error::UnknownIdentifier { name });
        }
        Ok(ExprFn { expr, domain })
    }

    pub fn constant(v: f64, domain: Interval) -> ExprFn {
        ExprFn { expr: Expr::constant(v), domain }
    }

    pub fn identity(domain: Interval) -> ExprFn {
        ExprFn { expr: Expr::var(), domain }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn with_domain(&self, domain: Interval) -> ExprFn {
        ExprFn { expr: self.expr.clone(), domain }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let v = self.expr.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OutsideDomain { x })
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        self.expr.as_const()
    }

    pub fn derivative(&self) -> ExprFn {
        ExprFn { expr: differentiate(&self.expr), domain: self.domain }
    }

    /// `self(inner(x))` on the domain of `inner`.
    pub fn compose(&self, inner: &ExprFn) -> ExprFn {
        ExprFn { expr: Expr::compose(&self.expr, &inner.expr), domain: inner.domain }
    }

    pub fn map(&self, f: impl FnOnce(Expr) -> Expr) -> ExprFn {
        ExprFn { expr: f(self.expr.clone()), domain: self.domain }
    }

    pub fn zip(&self, other: &ExprFn, f: impl FnOnce(Expr, Expr) -> Expr) -> ExprFn {
        ExprFn { expr: f(self.expr.clone(), other.expr.clone()), domain: self.domain }
    }
}

impl RealFn for ExprFn {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl RealFn for GridFn {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl fmt::Display for ExprFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Solve `f(x) = y` on `bracket` by safeguarded Newton iteration.
pub fn invert(f: &ExprFn, y: f64, bracket: (f64, f64)) -> Result<f64> {
    let df = f.derivative();
    invert_with(&|x| f.eval(x), &|x| df.eval(x), y, bracket.0, bracket.1)
}
