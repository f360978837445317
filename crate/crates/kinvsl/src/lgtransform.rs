//! Liouville–Green transformation: the change of variable
//! ξ(x) = ±∫_k^x (r/p)^{1/2} dt and unknown u = (pr)^{1/4} y that turns τ
//! into -d²/dξ² + V, together with the conjugated transform K̃ = G K G⁻¹.
//!
//! The ξ-coordinate rarely has a closed-form inverse, so the transformed
//! coefficients are kept as symbolic functions of x and pulled back through
//! a tabulated and Newton-polished x(ξ).

use rayon::prelude::*;
use serde::Serialize;

use crate::funcalg::{Expr, ExprFn, GridFn};
use crate::ktransform::{relative_residual, CoefficientResiduals, KTransform, SLProblem};
use crate::numerics::quad;
use crate::slcore::anchor;
use crate::{Error, Result};

/// Direction of ξ relative to x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Increasing,
    /// ξ(x) = ∫_x^k, so ξ runs opposite to x.
    Decreasing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Increasing => 1.0,
            Orientation::Decreasing => -1.0,
        }
    }
}

/// Levels of the geometric node cluster next to a singular finite end:
/// offsets w·10^{-j/4}, j = 1..=NODE_LEVELS.
const NODE_LEVELS: usize = 64;
/// Uniform nodes across the bulk of the interval.
const BULK_NODES: usize = 400;
const QUAD_RTOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct LGMap {
    /// ξ tabulated against x (x increasing).
    pub xi: GridFn,
    /// Anchor k with ξ(k) = 0; may sit at a finite regular endpoint.
    pub anchor: f64,
    pub orientation: Orientation,
    /// Ends of the ξ-interval, ordered (lower, upper).
    pub cal_a: f64,
    pub cal_b: f64,
    speed: ExprFn,
}

fn speed_of(problem: &SLProblem) -> ExprFn {
    problem
        .r
        .zip(&problem.p, Expr::div)
        .map(|e| Expr::pow(e, Expr::constant(0.5)))
}

/// Check (pr) > 0 with finite (pr)'/r on a sample.
fn check_applicable(problem: &SLProblem) -> Result<()> {
    let pr = problem.p.zip(&problem.r, Expr::mul);
    let g = pr.derivative().zip(&problem.r, Expr::div);
    let dg = g.derivative();
    for x in problem.sample_grid(400)? {
        let (v, gv, dv) = (pr.eval(x), g.eval(x), dg.eval(x));
        if !(v > 0.0) || !v.is_finite() || !gv.is_finite() || !dv.is_finite() {
            return Err(Error::DegenerateWeight { x });
        }
    }
    Ok(())
}

fn integrate(f: &ExprFn, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    Ok(quad::integrate(&|t| f.eval(t), a, b, 1e-300, QUAD_RTOL)?.value)
}

/// ∫ toward an end of (a, b) starting at `from`; infinite when the dyadic
/// shell contributions stop shrinking.
fn integral_to_end(speed: &ExprFn, from: f64, end: f64, width: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut last = from;
    let mut prev_piece = f64::INFINITY;
    let mut stalled = 0;
    for j in 1..=80 {
        let next = if end.is_finite() {
            end - (end - from) * 0.5f64.powi(j)
        } else {
            from + end.signum() * width * 2f64.powi(j)
        };
        if next == last {
            break;
        }
        let piece = integrate(speed, last, next)?.abs();
        total += piece;
        if piece > 0.7 * prev_piece {
            stalled += 1;
            if stalled >= 6 {
                return Ok(f64::INFINITY);
            }
        } else {
            stalled = 0;
        }
        prev_piece = piece;
        last = next;
        if piece <= 1e-17 * total {
            return Ok(total);
        }
    }
    Ok(total)
}

fn nodes(problem: &SLProblem, anchor: f64) -> Result<Vec<f64>> {
    let (lo, hi) = problem.working_bounds()?;
    let w = hi - lo;
    let mut xs: Vec<f64> = (0..=BULK_NODES).map(|i| lo + w * i as f64 / BULK_NODES as f64).collect();
    for (end, sign) in [(problem.interval.a, 1.0), (problem.interval.b, -1.0)] {
        if end.is_finite() && problem.is_singular_at(end) {
            xs.extend((1..=NODE_LEVELS).map(|j| end + sign * w * 10f64.powf(-(j as f64) / 4.0)));
        }
    }
    xs.push(anchor);
    xs.retain(|&x| {
        let inside = problem.interval.contains(x) || x == anchor;
        inside && problem.p.eval(x).is_finite() && problem.p.eval(x) > 0.0
    });
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

/// ξ with the default anchor and increasing orientation.
pub fn lg_build(problem: &SLProblem, anchor_at: Option<f64>) -> Result<LGMap> {
    lg_build_oriented(problem, anchor_at, Orientation::Increasing)
}

pub fn lg_build_oriented(problem: &SLProblem, anchor_at: Option<f64>, orientation: Orientation) -> Result<LGMap> {
    check_applicable(problem)?;
    let speed = speed_of(problem);
    let k = anchor_at.unwrap_or_else(|| anchor(problem));
    let in_closure = k >= problem.interval.a && k <= problem.interval.b && k.is_finite();
    if problem.interval.contains(k) && !speed.eval(k).is_finite() {
        return Err(Error::DegenerateWeight { x: k });
    }
    if !in_closure || !speed.eval(k).is_finite() {
        return Err(Error::Input(format!("Liouville–Green anchor {k} must be a point where r/p is finite")));
    }
    let xs = nodes(problem, k)?;
    let ka = xs.partition_point(|&x| x < k);
    let o = orientation.sign();
    let mut xi = vec![0.0; xs.len()];
    // Sweep outward from the anchor node.
    let pieces: Vec<f64> =
        xs.par_windows(2).map(|w| integrate(&speed, w[0], w[1])).collect::<Result<Vec<_>>>()?;
    for i in ka + 1..xs.len() {
        xi[i] = xi[i - 1] + o * pieces[i - 1];
    }
    for i in (0..ka).rev() {
        xi[i] = xi[i + 1] - o * pieces[i];
    }
    let (w0, w1) = problem.working_bounds()?;
    let to_a = if k == problem.interval.a {
        0.0
    } else {
        integral_to_end(&speed, k, problem.interval.a, 0.5 * (w1 - w0))?
    };
    let to_b = if k == problem.interval.b {
        0.0
    } else {
        integral_to_end(&speed, k, problem.interval.b, 0.5 * (w1 - w0))?
    };
    let (cal_a, cal_b) = match orientation {
        Orientation::Increasing => (-to_a, to_b),
        Orientation::Decreasing => (-to_b, to_a),
    };
    Ok(LGMap { xi: GridFn::new(xs, xi)?, anchor: k, orientation, cal_a, cal_b, speed })
}

impl LGMap {
    /// dξ/dx.
    pub fn slope(&self, x: f64) -> f64 {
        self.orientation.sign() * self.speed.eval(x)
    }

    /// ξ(x), integrated from the nearest tabulated node.
    pub fn xi_at(&self, x: f64) -> Result<f64> {
        let xs = self.xi.xs();
        if !(x >= xs[0] && x <= xs[xs.len() - 1]) {
            return Err(Error::OutsideDomain { x });
        }
        let i = xs.partition_point(|&t| t <= x).clamp(1, xs.len()) - 1;
        let j = if i + 1 < xs.len() && (xs[i + 1] - x) < (x - xs[i]) { i + 1 } else { i };
        Ok(self.xi.ys()[j] + self.orientation.sign() * integrate(&self.speed, xs[j], x)?)
    }

    /// x(ξ): bracket in the table, then safeguarded Newton.
    pub fn x_of_xi(&self, target: f64) -> Result<f64> {
        let (xs, ys) = (self.xi.xs(), self.xi.ys());
        let n = xs.len();
        let o = self.orientation.sign();
        // Index of the first node whose oriented ξ reaches the target.
        let pos = (0..n).collect::<Vec<_>>().partition_point(|&i| o * ys[i] < o * target);
        if pos == n || (pos == 0 && o * ys[0] > o * target) {
            return Err(Error::OutsideDomain { x: target });
        }
        if pos == 0 || ys[pos] == target {
            return Ok(xs[pos]);
        }
        let (mut lo, mut hi) = (xs[pos - 1], xs[pos]);
        let base = (lo, ys[pos - 1]);
        let g = |x: f64| -> Result<f64> { Ok(base.1 + o * integrate(&self.speed, base.0, x)? - target) };
        let mut x = lo + (hi - lo) * (target - ys[pos - 1]) / (ys[pos] - ys[pos - 1]);
        for _ in 0..100 {
            let gx = g(x)?;
            if gx == 0.0 {
                return Ok(x);
            }
            if o * gx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - gx / self.slope(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::MaxIterations { what: "Liouville–Green inversion", limit: 100 })
    }

    /// Range of ξ covered by the table.
    pub fn tabulated_range(&self) -> (f64, f64) {
        let ys = self.xi.ys();
        let (a, b) = (ys[0], ys[ys.len() - 1]);
        (a.min(b), a.max(b))
    }
}

/// V as a function of x: -(1/16)(1/(pr))[(pr)'/r]² + (1/4)(1/r)[(pr)'/r]' + q/r.
pub fn lg_potential(problem: &SLProblem) -> Result<ExprFn> {
    check_applicable(problem)?;
    let pr = problem.p.zip(&problem.r, Expr::mul);
    let g = pr.derivative().zip(&problem.r, Expr::div);
    let c = |v: f64| Expr::constant(v);
    let first = Expr::mul(c(-1.0 / 16.0), Expr::div(Expr::pow(g.expr().clone(), c(2.0)), pr.expr().clone()));
    let second = Expr::mul(c(0.25), Expr::div(g.derivative().expr().clone(), problem.r.expr().clone()));
    let third = Expr::div(problem.q.expr().clone(), problem.r.expr().clone());
    ExprFn::new(Expr::add(Expr::add(first, second), third), problem.interval)
}

/// Conjugated transform K̃ = G K G⁻¹ with p̃ = r̃ = 1, q̃ = V and C̃ = 1.
#[derive(Clone, Debug)]
pub struct LGTransform {
    pub map: LGMap,
    /// V(ξ(x)).
    pub potential: ExprFn,
    /// Ã(ξ(x)) = C^{-1/4} A^{1/2} φ'^{-1/4}.
    pub weight: ExprFn,
    k: KTransform,
    /// dÃ/dξ and d²Ã/dξ² up to the orientation sign, as functions of x.
    weight_d1: ExprFn,
    weight_d2: ExprFn,
    pub residuals: CoefficientResiduals,
}

/// Admission tolerance for the transformed pair.
pub const LG_TOL: f64 = 1e-9;

pub fn lg_transform_k(problem: &SLProblem, k: &KTransform, map: &LGMap) -> Result<LGTransform> {
    let potential = lg_potential(problem)?;
    let c = |v: f64| Expr::constant(v);
    let weight = k.a.zip(&k.phi_prime(), |a, d| {
        Expr::mul(
            c(k.c.powf(-0.25)),
            Expr::mul(Expr::pow(a, c(0.5)), Expr::pow(d, c(-0.25))),
        )
    });
    let speed = &map.speed;
    let weight_d1 = weight.derivative().zip(speed, Expr::div);
    let weight_d2 = weight_d1.derivative().zip(speed, Expr::div);
    let mut out = LGTransform {
        map: map.clone(),
        potential,
        weight,
        k: k.clone(),
        weight_d1,
        weight_d2,
        residuals: CoefficientResiduals { res_r: 0.0, res_p: 0.0, res_q: 0.0 },
    };
    let (lo, hi) = out.map.tabulated_range();
    let span = (hi.min(lo + 40.0) - lo).max(0.0);
    let xis: Vec<f64> = (1..400).map(|i| lo + span * i as f64 / 400.0).collect();
    out.residuals = out.residuals_on(&xis)?;
    if !(out.residuals.max() <= LG_TOL) {
        return Err(Error::Validation(format!("transformed pair fails the coefficient equations: {:?}", out.residuals)));
    }
    Ok(out)
}

impl LGTransform {
    pub fn potential_at(&self, xi: f64) -> Result<f64> {
        Ok(self.potential.eval(self.map.x_of_xi(xi)?))
    }

    pub fn a_tilde(&self, xi: f64) -> Result<f64> {
        Ok(self.weight.eval(self.map.x_of_xi(xi)?))
    }

    /// φ̃(ξ) = ξ(φ(x(ξ))).
    pub fn phi_tilde(&self, xi: f64) -> Result<f64> {
        self.map.xi_at(self.k.phi.eval(self.map.x_of_xi(xi)?))
    }

    /// φ̃⁻¹(ξ) = ξ(φ⁻¹(x(ξ))).
    pub fn phi_tilde_inverse(&self, xi: f64) -> Result<f64> {
        self.map.xi_at(self.k.phi_inverse(self.map.x_of_xi(xi)?)?)
    }

    /// dφ̃/dξ at the ξ of `x`.
    fn phi_tilde_prime_x(&self, x: f64) -> f64 {
        self.map.speed.eval(self.k.phi.eval(x)) * self.k.phi_prime().eval(x) / self.map.speed.eval(x)
    }

    /// Weight of K̃* f = w · f∘φ̃⁻¹ from the adjoint formula Ã(ψ̃)/φ̃'(ψ̃).
    pub fn adjoint_weight(&self, xi: f64) -> Result<f64> {
        let y = self.k.phi_inverse(self.map.x_of_xi(xi)?)?;
        Ok(self.weight.eval(y) / self.phi_tilde_prime_x(y))
    }

    /// The same weight as displayed for G K* G⁻¹:
    /// C^{-3/4} A(φ⁻¹(x))^{3/2} φ'(φ⁻¹(x))^{-3/4}.
    pub fn adjoint_weight_display(&self, xi: f64) -> Result<f64> {
        let y = self.k.phi_inverse(self.map.x_of_xi(xi)?)?;
        Ok(self.k.c.powf(-0.75) * self.k.a.eval(y).powf(1.5) * self.k.phi_prime().eval(y).powf(-0.75))
    }

    /// Coefficient-equation residuals of (1, V, 1; Ã, φ̃, 1) at the given ξ.
    pub fn residuals_on(&self, xis: &[f64]) -> Result<CoefficientResiduals> {
        let rows = xis
            .par_iter()
            .map(|&xi| -> Result<(f64, f64)> {
                let x = self.map.x_of_xi(xi)?;
                let y = self.k.phi_inverse(x)?;
                let a = self.weight.eval(y);
                let d = self.phi_tilde_prime_x(y);
                let rp = relative_residual(1.0, a * a * d);
                let rhs = a / d * (a * self.potential.eval(y) - self.weight_d2.eval(y));
                let rq = relative_residual(self.potential.eval(x), rhs);
                if rp.is_nan() || rq.is_nan() {
                    return Err(Error::OutsideDomain { x: xi });
                }
                Ok((rp, rq))
            })
            .collect::<Result<Vec<_>>>()?;
        let (res_p, res_q) = rows.iter().fold((0.0f64, 0.0f64), |acc, r| (acc.0.max(r.0), acc.1.max(r.1)));
        Ok(CoefficientResiduals { res_r: 0.0, res_p, res_q })
    }

    /// dÃ/dξ at ξ (used by boundary-data checks on the Schrödinger side).
    pub fn a_tilde_slope(&self, xi: f64) -> Result<f64> {
        Ok(self.map.orientation.sign() * self.weight_d1.eval(self.map.x_of_xi(xi)?))
    }
}

/// (Gf)(ξ) = (pr)^{1/4}(x(ξ)) f(x(ξ)).
pub fn unitary_image(problem: &SLProblem, map: &LGMap, f: &dyn Fn(f64) -> f64, xi: f64) -> Result<f64> {
    let x = map.x_of_xi(xi)?;
    Ok((problem.p.eval(x) * problem.r.eval(x)).powf(0.25) * f(x))
}
