//! Schröder's equation f(φ⁻¹(x)) = s f(x): residuals, the Koenigs solution
//! at an attracting fixed point, and the families of new coefficient
//! triples it generates.

use rayon::prelude::*;

use crate::funcalg::{Expr, ExprFn, Func, GridFn, RealFn};
use crate::ktransform::{relative_residual, residual_coefficient_eqs, CoefficientResiduals, KTransform, SLProblem};
use crate::{Error, Result};

/// Largest relative residual of f(φ⁻¹(x)) = s f(x) over `grid`.
pub fn verify_schroeder(f: &dyn RealFn, phi_inv: &dyn RealFn, s: f64, grid: &[f64]) -> f64 {
    grid.par_iter()
        .map(|&x| relative_residual(f.value(phi_inv.value(x)), s * f.value(x)))
        .reduce(|| 0.0, |a, b| if b.is_nan() || b > a { b } else { a })
}

/// Distance from the fixed point below which the cubic Koenigs series is used.
pub const SERIES_RADIUS: f64 = 1e-4;

/// Koenigs linearization σ at an attracting fixed point d:
/// σ(φ(x)) = φ'(d) σ(x), σ(x) ~ x - d near d.
#[derive(Clone, Debug)]
pub struct Koenigs {
    phi: ExprFn,
    fixed_point: f64,
    multiplier: f64,
    /// Coefficients of σ(d + w) = w + c2 w² + c3 w³ + ...
    c2: f64,
    c3: f64,
    depth: usize,
}

pub fn koenigs(phi: &ExprFn, fixed_point: f64, depth: usize) -> Result<Koenigs> {
    if depth == 0 {
        return Err(Error::Input("Koenigs depth must be at least 1".into()));
    }
    let d1 = phi.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let lambda = d1.eval(fixed_point);
    let moved = (phi.eval(fixed_point) - fixed_point).abs();
    if !(lambda.abs() < 1.0) || lambda == 0.0 || !(moved <= 1e-12 * fixed_point.abs().max(1.0)) {
        return Err(Error::NotAttracting { point: fixed_point, slope: lambda });
    }
    let (a2, a3) = (d2.eval(fixed_point) / 2.0, d3.eval(fixed_point) / 6.0);
    let c2 = a2 / (lambda - lambda * lambda);
    let c3 = (a3 + 2.0 * lambda * a2 * c2) / (lambda - lambda.powi(3));
    Ok(Koenigs { phi: phi.clone(), fixed_point, multiplier: lambda, c2, c3, depth })
}

impl Koenigs {
    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn fixed_point(&self) -> f64 {
        self.fixed_point
    }

    fn series(&self, w: f64) -> f64 {
        w * (1.0 + w * (self.c2 + w * self.c3))
    }

    /// σ(x) by iterating φ into the disc |w| ≤ 1e-4 around d, where the
    /// cubic series is exact to rounding, or until successive estimates
    /// agree to 1e-13. Iterating further only amplifies rounding in w.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let d = self.fixed_point;
        let mut y = x;
        let mut scale = 1.0;
        let mut prev = self.series(y - d);
        for _ in 0..self.depth {
            y = self.phi.eval(y);
            scale /= self.multiplier;
            if !y.is_finite() {
                return Err(Error::OutsideDomain { x });
            }
            let est = self.series(y - d) * scale;
            if (y - d).abs() <= SERIES_RADIUS * d.abs().max(1.0) || (est - prev).abs() < 1e-13 * est.abs().max(1e-300) {
                return Ok(est);
            }
            prev = est;
        }
        if (y - d).abs() > 0.5 * d.abs().max(1.0) {
            return Err(Error::MaxIterations { what: "Koenigs iteration", limit: self.depth });
        }
        Ok(prev)
    }

    pub fn sample(&self, xs: &[f64]) -> Result<GridFn> {
        let ys = xs.par_iter().map(|&x| self.eval(x)).collect::<Result<Vec<f64>>>()?;
        GridFn::new(xs.to_vec(), ys)
    }
}

impl RealFn for Koenigs {
    fn value(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }
}

/// Constant A and an antiderivative P of ±1/p with A²P = P∘φ⁻¹.
#[derive(Clone, Debug)]
pub struct Seed {
    pub problem: SLProblem,
    pub k: KTransform,
    pub antiderivative: ExprFn,
    /// P' = sign / p.
    pub sign: f64,
    pub a: f64,
}

fn check_grid(problem: &SLProblem) -> Result<Vec<f64>> {
    problem.sample_grid(400)
}

/// Validate P against (p, A, φ); `anchor` is the endpoint where P must vanish.
pub fn seed(problem: &SLProblem, k: &KTransform, antiderivative: ExprFn, anchor: Option<f64>) -> Result<Seed> {
    let a = k.a.as_const().ok_or_else(|| Error::Validation("the weight A must be constant".into()))?;
    let grid = check_grid(problem)?;
    let dp = antiderivative.derivative();
    let mid = grid[grid.len() / 2];
    let sign = (dp.eval(mid) * problem.p.eval(mid)).signum();
    for &x in &grid {
        let res = relative_residual(dp.eval(x) * problem.p.eval(x), sign);
        if !(res <= 1e-10) {
            return Err(Error::Validation(format!("P' differs from ±1/p at x = {x} (residual {res:.3e})")));
        }
    }
    if let Some(d) = anchor {
        let v = antiderivative.eval(d);
        if !(v.abs() <= 1e-12) {
            return Err(Error::Validation(format!("P({d}) = {v} must vanish")));
        }
    }
    let phi_inv = |x: f64| k.phi_inverse(x).unwrap_or(f64::NAN);
    let res = verify_schroeder(&antiderivative, &phi_inv, a * a, &grid);
    if !(res <= 1e-10) {
        return Err(Error::Validation(format!("P(φ⁻¹(x)) = A²P(x) fails (residual {res:.3e})")));
    }
    Ok(Seed { problem: problem.clone(), k: k.clone(), antiderivative, sign, a })
}

/// A generated triple, re-validated against the coefficient equations.
#[derive(Clone, Debug)]
pub struct Family {
    pub antiderivative: ExprFn,
    pub p: ExprFn,
    pub a: f64,
    pub problem: SLProblem,
    pub k: KTransform,
    pub residuals: CoefficientResiduals,
}

/// Admission tolerance for generated triples.
pub const FAMILY_TOL: f64 = 1e-9;

fn admit(seed: &Seed, antiderivative: ExprFn, p: ExprFn, a: f64) -> Result<Family> {
    let grid = check_grid(&seed.problem)?;
    for &x in &grid {
        let v = p.eval(x);
        if !v.is_finite() {
            let end = if x - seed.problem.interval.a < seed.problem.interval.b - x {
                seed.problem.interval.a
            } else {
                seed.problem.interval.b
            };
            return Err(Error::NotIntegrable { endpoint: end });
        }
        if v <= 0.0 {
            return Err(Error::SignChange { x });
        }
    }
    let mut problem = seed.problem.clone();
    problem.p = p.clone();
    let mut k = seed.k.clone();
    k.a = ExprFn::constant(a, problem.interval);
    let residuals = residual_coefficient_eqs(&problem, &k, &problem.sample_grid(1000)?)?;
    if !(residuals.max() <= FAMILY_TOL) {
        return Err(Error::Validation(format!("generated triple fails the coefficient equations: {residuals:?}")));
    }
    Ok(Family { antiderivative, p, a, problem, k, residuals })
}

/// Pⁿ with A ↦ Aⁿ and p ↦ p / (n Pⁿ⁻¹).
pub fn family_power(seed: &Seed, n: u32) -> Result<Family> {
    if n == 0 {
        return Err(Error::Input("power n must be at least 1".into()));
    }
    let big_p = seed.antiderivative.expr().clone();
    let nf = n as f64;
    let p_n = Expr::div(
        seed.problem.p.expr().clone(),
        Expr::mul(Expr::constant(nf), Expr::pow(big_p.clone(), Expr::constant(nf - 1.0))),
    );
    let dom = seed.problem.interval;
    let anti = ExprFn::new(Expr::pow(big_p, Expr::constant(nf)), dom)?;
    admit(seed, anti, ExprFn::new(p_n, dom)?, seed.a.powi(n as i32))
}

/// P·G(ln P) for a ln(A²)-periodic G, giving 1/p̃ = ±P'[G(ln P) + G'(ln P)].
pub fn family_periodic(seed: &Seed, g: &ExprFn) -> Result<Family> {
    let period = (seed.a * seed.a).ln();
    for t in crate::numerics::linspace(-3.0 * period, 3.0 * period, 61) {
        let res = relative_residual(g.eval(t + period), g.eval(t));
        if !(res <= 1e-12) {
            return Err(Error::Validation(format!("G is not ln(A²)-periodic at t = {t}")));
        }
    }
    let big_p = seed.antiderivative.expr().clone();
    let log_p = Expr::call(Func::Ln, big_p.clone());
    let g_at = Expr::compose(g.expr(), &log_p);
    let dg_at = Expr::compose(g.derivative().expr(), &log_p);
    let dp = seed.antiderivative.derivative().expr().clone();
    let inv_p = Expr::mul(Expr::constant(seed.sign), Expr::mul(dp, Expr::add(g_at.clone(), dg_at)));
    let dom = seed.problem.interval;
    let anti = ExprFn::new(Expr::mul(big_p, g_at), dom)?;
    let fam = admit(seed, anti, ExprFn::new(Expr::div(Expr::constant(1.0), inv_p), dom)?, seed.a)?;
    let grid = check_grid(&seed.problem)?;
    let phi_inv = |x: f64| seed.k.phi_inverse(x).unwrap_or(f64::NAN);
    let res = verify_schroeder(&fam.antiderivative, &phi_inv, seed.a * seed.a, &grid);
    if !(res <= FAMILY_TOL) {
        return Err(Error::Validation(format!("P·G(ln P) fails Schröder's equation (residual {res:.3e})")));
    }
    Ok(fam)
}

/// Residuals of f∘φ⁻¹ = A²f and f∘φ⁻¹ = A⁻²f.
pub fn orientations(f: &dyn RealFn, k: &KTransform, a: f64, grid: &[f64]) -> (f64, f64) {
    let phi_inv = |x: f64| k.phi_inverse(x).unwrap_or(f64::NAN);
    (verify_schroeder(f, &phi_inv, a * a, grid), verify_schroeder(f, &phi_inv, 1.0 / (a * a), grid))
}
