//! The weighted composition operator (Kf)(x) = A(x) f(φ(x)) paired with a
//! three-coefficient Sturm–Liouville expression, and the checks that K
//! commutes with it.

use rayon::prelude::*;

use crate::funcalg::{invert_with, Expr, ExprFn, Func, GridFn, Interval, RealFn};
use crate::numerics::{graded_grid, quad::GaussRule};
use crate::{Error, Result};

/// Coefficients p, q, r on (a, b) for τ = (1/r)(-(p d/dx)' + q).
#[derive(Clone, Debug)]
pub struct SLProblem {
    pub p: ExprFn,
    pub q: ExprFn,
    pub r: ExprFn,
    pub interval: Interval,
    /// Points (usually endpoints) where a coefficient blows up or degenerates.
    pub singular: Vec<f64>,
    /// Working cut-off for an infinite endpoint: the computational interval
    /// ends at `a + length` or `b - length` measured from the finite end.
    pub truncation: Option<f64>,
}

impl SLProblem {
    pub fn new(p: ExprFn, q: ExprFn, r: ExprFn, interval: Interval) -> SLProblem {
        SLProblem { p, q, r, interval, singular: Vec::new(), truncation: None }
    }

    pub fn with_singular(mut self, points: &[f64]) -> SLProblem {
        self.singular = points.to_vec();
        self
    }

    pub fn with_truncation(mut self, length: f64) -> SLProblem {
        self.truncation = Some(length);
        self
    }

    pub fn is_singular_at(&self, d: f64) -> bool {
        !d.is_finite() || self.singular.iter().any(|&s| s == d)
    }

    /// Finite stand-in for (a, b), replacing infinite ends by the truncation.
    pub fn working_bounds(&self) -> Result<(f64, f64)> {
        let Interval { a, b } = self.interval;
        let need = || Error::Input("an infinite endpoint needs a truncation length".into());
        match (a.is_finite(), b.is_finite()) {
            (true, true) => Ok((a, b)),
            (true, false) => Ok((a, a + self.truncation.ok_or_else(need)?)),
            (false, true) => Ok((b - self.truncation.ok_or_else(need)?, b)),
            (false, false) => {
                let l = self.truncation.ok_or_else(need)?;
                Ok((-l, l))
            }
        }
    }

    /// Graded interior grid over the working bounds.
    pub fn sample_grid(&self, n: usize) -> Result<Vec<f64>> {
        let (lo, hi) = self.working_bounds()?;
        Ok(graded_grid(lo, hi, n, self.is_singular_at(self.interval.a), self.is_singular_at(self.interval.b)))
    }

    /// p > 0 and r > 0 on a sample.
    pub fn check_positivity(&self, n: usize) -> Result<()> {
        for x in self.sample_grid(n)? {
            let (p, r) = (self.p.eval(x), self.r.eval(x));
            if !(p > 0.0) || !(r > 0.0) {
                return Err(Error::Validation(format!("p or r not positive at x = {x}")));
            }
        }
        Ok(())
    }

    /// Exact τf = (1/r)(-(p f')' + q f).
    pub fn tau(&self, f: &ExprFn) -> ExprFn {
        let flux = self.quasi(f);
        let inner = Expr::add(Expr::neg(flux.derivative().expr().clone()), Expr::mul(self.q.expr().clone(), f.expr().clone()));
        ExprFn::new(Expr::div(inner, self.r.expr().clone()), f.domain()).expect("bound expressions")
    }

    /// Quasi-derivative p f'.
    pub fn quasi(&self, f: &ExprFn) -> ExprFn {
        self.p.zip(&f.derivative(), Expr::mul)
    }
}

/// K = (A, φ, C). `phi_inv` holds a closed-form inverse when one is known.
#[derive(Clone, Debug)]
pub struct KTransform {
    pub a: ExprFn,
    pub phi: ExprFn,
    pub c: f64,
    pub phi_inv: Option<ExprFn>,
}

impl KTransform {
    pub fn new(a: ExprFn, phi: ExprFn, c: f64) -> KTransform {
        KTransform { a, phi, c, phi_inv: None }
    }

    pub fn with_inverse(mut self, phi_inv: ExprFn) -> KTransform {
        self.phi_inv = Some(phi_inv);
        self
    }

    pub fn identity(domain: Interval) -> KTransform {
        KTransform::new(ExprFn::constant(1.0, domain), ExprFn::identity(domain), 1.0)
            .with_inverse(ExprFn::identity(domain))
    }

    pub fn phi_prime(&self) -> ExprFn {
        self.phi.derivative()
    }

    /// A^{[1]} = p A'.
    pub fn a_quasi(&self, problem: &SLProblem) -> ExprFn {
        problem.p.zip(&self.a.derivative(), Expr::mul)
    }

    /// φ⁻¹(y), closed form if registered, otherwise by safeguarded Newton.
    pub fn phi_inverse(&self, y: f64) -> Result<f64> {
        if let Some(inv) = &self.phi_inv {
            return inv.try_eval(y);
        }
        let dom = self.phi.domain();
        let dphi = self.phi.derivative();
        let clamp_lo = |t: f64| {
            if t > dom.a {
                t
            } else if dom.a.is_finite() && self.phi.eval(dom.a).is_finite() {
                dom.a
            } else {
                dom.a + 1e-12 * dom.a.abs().max(1.0)
            }
        };
        let clamp_hi = |t: f64| {
            if t < dom.b {
                t
            } else if dom.b.is_finite() && self.phi.eval(dom.b).is_finite() {
                dom.b
            } else {
                dom.b - 1e-12 * dom.b.abs().max(1.0)
            }
        };
        let mut step = 1e-3 * (1.0 + y.abs());
        for _ in 0..200 {
            let (lo, hi) = (clamp_lo(y - step), clamp_hi(y + step));
            let (glo, ghi) = (self.phi.eval(lo) - y, self.phi.eval(hi) - y);
            if glo.is_finite() && ghi.is_finite() && glo.signum() != ghi.signum() {
                return invert_with(&|t| self.phi.eval(t), &|t| dphi.eval(t), y, lo, hi);
            }
            step *= 2.0;
        }
        Err(Error::NoSignChange { lo: dom.a, hi: dom.b })
    }
}

/// (Kf)(x) = A(x) f(φ(x)) sampled at `xs`.
pub fn apply_k(k: &KTransform, f: &dyn RealFn, xs: &[f64]) -> Result<GridFn> {
    let ys = xs
        .iter()
        .map(|&x| {
            let v = k.a.eval(x) * f.value(k.phi.eval(x));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::OutsideDomain { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFn::new(xs.to_vec(), ys)
}

/// (K*g)(x) = A(ψ) / (C φ'(ψ)) g(ψ) with ψ = φ⁻¹(x).
pub fn apply_k_adjoint(k: &KTransform, g: &dyn RealFn, xs: &[f64]) -> Result<GridFn> {
    let dphi = k.phi_prime();
    let ys = xs
        .iter()
        .map(|&x| {
            let psi = k.phi_inverse(x)?;
            let v = k.a.eval(psi) / (k.c * dphi.eval(psi)) * g.value(psi);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::OutsideDomain { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFn::new(xs.to_vec(), ys)
}

/// (K⁻¹f)(x) = f(ψ) / A(ψ).
pub fn apply_k_inverse(k: &KTransform, f: &dyn RealFn, xs: &[f64]) -> Result<GridFn> {
    let ys = xs
        .iter()
        .map(|&x| {
            let psi = k.phi_inverse(x)?;
            let v = f.value(psi) / k.a.eval(psi);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::OutsideDomain { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFn::new(xs.to_vec(), ys)
}

#[derive(Clone, Debug)]
pub struct Boundedness {
    /// sup A²/φ' on the finest sample.
    pub sup_ratio_1: f64,
    /// sup φ'/A² on the finest sample.
    pub sup_ratio_2: f64,
    pub ok: bool,
    /// (sample size, working length, sup 1, sup 2) per refinement.
    pub trend: Vec<(usize, f64, f64, f64)>,
}

/// Empirical suprema of A²/φ' and φ'/A² over refining samples. Infinite
/// endpoints are probed on expanding compacts (L, 2L, 4L).
pub fn check_boundedness(k: &KTransform, problem: &SLProblem, n_sample: usize) -> Boundedness {
    let dphi = k.phi_prime();
    let mut trend = Vec::new();
    for level in 0..3u32 {
        let n = n_sample << level;
        let scale = (1u32 << level) as f64;
        let mut pb = problem.clone();
        if let Some(l) = pb.truncation {
            pb.truncation = Some(l * scale);
        }
        let grid = match pb.sample_grid(n) {
            Ok(g) => g,
            Err(_) => {
                return Boundedness { sup_ratio_1: f64::NAN, sup_ratio_2: f64::NAN, ok: false, trend };
            }
        };
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        // Finite endpoint values count when A and φ' extend continuously there.
        for d in [problem.interval.a, problem.interval.b] {
            let (a2, dd) = (k.a.eval(d).powi(2), dphi.eval(d));
            if d.is_finite() && a2.is_finite() && dd.is_finite() && a2 > 0.0 && dd > 0.0 {
                s1 = s1.max(a2 / dd);
                s2 = s2.max(dd / a2);
            }
        }
        for x in grid {
            let a2 = k.a.eval(x).powi(2);
            let d = dphi.eval(x);
            let (r1, r2) = (a2 / d, d / a2);
            s1 = if r1.is_nan() { f64::INFINITY } else { s1.max(r1) };
            s2 = if r2.is_nan() { f64::INFINITY } else { s2.max(r2) };
        }
        let length = pb.working_bounds().map(|(lo, hi)| hi - lo).unwrap_or(f64::NAN);
        trend.push((n, length, s1, s2));
    }
    let (_, _, s1, s2) = trend[trend.len() - 1];
    let (_, _, p1, p2) = trend[trend.len() - 2];
    let settled = |now: f64, before: f64| now.is_finite() && (now - before).abs() <= 1e-3 * now.abs().max(1.0);
    let ok = settled(s1, p1) && settled(s2, p2);
    Boundedness { sup_ratio_1: s1, sup_ratio_2: s2, ok, trend }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientResiduals {
    pub res_r: f64,
    pub res_p: f64,
    pub res_q: f64,
}

impl CoefficientResiduals {
    pub fn max(&self) -> f64 {
        self.res_r.max(self.res_p).max(self.res_q)
    }
}

/// |lhs - rhs| / (1 + |lhs| + |rhs|).
pub fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs())
}

/// Maximum relative residuals of the three coefficient equations
/// r = C r∘ψ, p = (A²φ'p)∘ψ, q = (A/φ')(A q - (A^{[1]})')∘ψ with ψ = φ⁻¹.
pub fn residual_coefficient_eqs(problem: &SLProblem, k: &KTransform, grid: &[f64]) -> Result<CoefficientResiduals> {
    let dphi = k.phi_prime();
    let a1_prime = k.a_quasi(problem).derivative();
    let rows = grid
        .par_iter()
        .map(|&x| -> Result<[f64; 3]> {
            let psi = k.phi_inverse(x)?;
            let (a, d) = (k.a.eval(psi), dphi.eval(psi));
            let rr = relative_residual(problem.r.eval(x), k.c * problem.r.eval(psi));
            let rp = relative_residual(problem.p.eval(x), a * a * d * problem.p.eval(psi));
            let rq = relative_residual(problem.q.eval(x), a / d * (a * problem.q.eval(psi) - a1_prime.eval(psi)));
            if rr.is_nan() || rp.is_nan() || rq.is_nan() {
                return Err(Error::OutsideDomain { x });
            }
            Ok([rr, rp, rq])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = CoefficientResiduals { res_r: 0.0, res_p: 0.0, res_q: 0.0 };
    for [a, b, c] in rows {
        out.res_r = out.res_r.max(a);
        out.res_p = out.res_p.max(b);
        out.res_q = out.res_q.max(c);
    }
    Ok(out)
}

/// Smooth compactly supported test function: bump window times polynomial.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub f: ExprFn,
    pub support: (f64, f64),
}

impl TestFunction {
    /// exp(-1/(1-t²)) on (lo, hi), t the affine coordinate, times `poly`.
    pub fn bump(lo: f64, hi: f64, poly: &Expr, domain: Interval) -> TestFunction {
        let t = Expr::div(
            Expr::sub(Expr::mul(Expr::constant(2.0), Expr::var()), Expr::constant(lo + hi)),
            Expr::constant(hi - lo),
        );
        let gap = Expr::sub(Expr::constant(1.0), Expr::pow(t, Expr::constant(2.0)));
        let window = Expr::call(Func::Exp, Expr::neg(Expr::div(Expr::constant(1.0), gap)));
        let f = ExprFn::new(Expr::mul(window, poly.clone()), domain).expect("closed expression");
        TestFunction { f, support: (lo, hi) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.support.0 && x < self.support.1 {
            self.f.eval(x)
        } else {
            0.0
        }
    }
}

/// Three bumps inside [a + 0.05w, b - 0.05w] of the working bounds.
pub fn standard_bumps(problem: &SLProblem) -> Result<Vec<TestFunction>> {
    let (lo, hi) = problem.working_bounds()?;
    let w = hi - lo;
    let (s0, s1) = (lo + 0.05 * w, hi - 0.05 * w);
    let span = s1 - s0;
    let x = Expr::var();
    let one_plus_x = Expr::add(Expr::constant(1.0), x.clone());
    let quad = Expr::add(Expr::pow(x.clone(), Expr::constant(2.0)), Expr::mul(Expr::constant(-0.5), x));
    Ok(vec![
        TestFunction::bump(s0, s1, &Expr::constant(1.0), problem.interval),
        TestFunction::bump(s0, s0 + 0.6 * span, &one_plus_x, problem.interval),
        TestFunction::bump(s0 + 0.3 * span, s1, &quad, problem.interval),
    ])
}

/// Relative L²_r norm of K*τKf - τf, with τ applied symbolically to the
/// composite A·(f∘φ).
pub fn residual_operator_identity(problem: &SLProblem, k: &KTransform, f: &TestFunction) -> Result<f64> {
    let kf = k.a.zip(&f.f.compose(&k.phi), Expr::mul);
    let tau_kf = problem.tau(&kf);
    let tau_f = problem.tau(&f.f);
    let dphi = k.phi_prime();
    let rule = GaussRule::new(8);
    let pts = rule.composite_points(f.support.0, f.support.1, 250);
    let parts = pts
        .par_iter()
        .map(|&(x, w)| -> Result<(f64, f64)> {
            let psi = k.phi_inverse(x)?;
            let lhs = k.a.eval(psi) / (k.c * dphi.eval(psi)) * tau_kf.eval(psi);
            let rhs = tau_f.eval(x);
            let r = problem.r.eval(x);
            if !lhs.is_finite() || !rhs.is_finite() {
                return Err(Error::OutsideDomain { x });
            }
            Ok((w * r * (lhs - rhs).powi(2), w * r * rhs * rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}
