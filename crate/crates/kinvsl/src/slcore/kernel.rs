use serde::Serialize;

use super::classify::{
    anchor, classify_endpoint, endpoint, l2_trend, shell_points, shell_trend, EndpointClass, EndpointKind, Side, Trend,
};
use super::solve::{solve_tau_lenient, solve_tau_with, SolutionFn};
use crate::ktransform::{KTransform, SLProblem};
use crate::numerics::linspace;
use crate::numerics::quad::GaussRule;
use crate::{Error, Result};

/// Length used for an infinite endpoint when the problem gives no larger one.
pub const KERNEL_TRUNCATION: f64 = 40.0;
/// Integration tolerance for kernel solutions.
pub const KERNEL_RTOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KernelSolution {
    pub solution: SolutionFn,
    pub l2_at_a: bool,
    pub l2_at_b: bool,
}

impl KernelSolution {
    pub fn is_l2(&self) -> bool {
        self.l2_at_a && self.l2_at_b
    }
}

#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub class_a: EndpointClass,
    pub class_b: EndpointClass,
    /// Candidate solutions of τy = 0; only those with both flags set are in the kernel.
    pub candidates: Vec<KernelSolution>,
    pub dimension: usize,
}

impl KernelBasis {
    pub fn members(&self) -> Vec<&SolutionFn> {
        self.candidates.iter().filter(|c| c.is_l2()).map(|c| &c.solution).collect()
    }
}

fn coefficients_finite_at(problem: &SLProblem, d: f64) -> bool {
    let p = problem.p.eval(d);
    p > 0.0 && p.is_finite() && problem.q.eval(d).is_finite() && problem.r.eval(d).is_finite()
}

/// Point at which integration stops next to an endpoint.
pub fn computational_end(problem: &SLProblem, class: &EndpointClass) -> f64 {
    let d = class.endpoint;
    let sign = if class.side == Side::A { 1.0 } else { -1.0 };
    if !d.is_finite() {
        let length = problem.truncation.unwrap_or(0.0).max(KERNEL_TRUNCATION);
        let base = match class.side {
            Side::A => problem.interval.b.min(0.0),
            Side::B => problem.interval.a.max(0.0),
        };
        let base = if base.is_finite() { base } else { 0.0 };
        return base - sign * length;
    }
    if class.kind == EndpointKind::Regular && coefficients_finite_at(problem, d) {
        return d;
    }
    let other = match class.side {
        Side::A => problem.interval.b,
        Side::B => problem.interval.a,
    };
    let width = if other.is_finite() { (other - d).abs() } else { 1.0 };
    d + sign * (1e-14 * width).max(1e-12 * d.abs())
}

/// Data at a limit-point end that seeds the solution decaying there.
fn recessive_seed(problem: &SLProblem, side: Side, at: f64) -> (f64, f64) {
    if endpoint(problem, side).is_finite() {
        return (1.0, 0.0);
    }
    let pq = problem.p.eval(at) * problem.q.eval(at);
    if pq > 0.0 {
        let slope = pq.sqrt();
        match side {
            Side::B => (1.0, -slope),
            Side::A => (1.0, slope),
        }
    } else {
        (1.0, 0.0)
    }
}

fn normalized(sol: SolutionFn) -> SolutionFn {
    let n = sol.l2_total().sqrt();
    if n > 0.0 && n.is_finite() {
        sol.scaled(1.0 / n)
    } else {
        sol
    }
}

/// Shell integrals of |y|²r read off a solution already integrated outward
/// from the endpoint. Integrating back toward the end would amplify the
/// dominant solution and mask a square integrable recessive one.
fn stored_l2_trend(problem: &SLProblem, side: Side, sol: &SolutionFn, mid: f64) -> Trend {
    let rule = GaussRule::new(20);
    let pts = shell_points(problem, side, mid);
    let mut incs = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
        if lo < sol.lo() || hi > sol.hi() {
            break;
        }
        let f = |x: f64| sol.value(x).powi(2) * problem.r.eval(x).abs();
        incs.push(rule.integrate(&f, lo, hi));
    }
    shell_trend(&incs)
}

/// At a limit-point end the least growing solution need not be square
/// integrable (0 may lie in the essential spectrum); ask the tail.
fn recessive_is_l2(problem: &SLProblem, class: &EndpointClass, sol: &SolutionFn, mid: f64) -> Result<bool> {
    let trend = if class.endpoint.is_finite() {
        stored_l2_trend(problem, class.side, sol, mid)
    } else {
        l2_trend(problem, class.side, 0.0, mid, sol.eval(mid)?)
    };
    match trend {
        Trend::Converges => Ok(true),
        Trend::Diverges => Ok(false),
        Trend::Undecided => Err(Error::Inconclusive {
            endpoint: class.endpoint,
            detail: "square integrability of the recessive solution".into(),
        }),
    }
}

/// Solve τy = 0 across [lo, hi]; near a limit-circle end that is not
/// regular every solution is square integrable, so the integration may stop
/// where the singularity stalls it.
fn solve_toward(
    problem: &SLProblem,
    far: &EndpointClass,
    x0: f64,
    init: (f64, f64),
    lo: f64,
    hi: f64,
) -> Result<SolutionFn> {
    if far.kind == EndpointKind::LimitCircle {
        solve_tau_lenient(problem, 0.0, x0, init, lo, hi, KERNEL_RTOL)
    } else {
        solve_tau_with(problem, 0.0, x0, init, lo, hi, KERNEL_RTOL)
    }
}

/// Solutions of τy = 0 that are square integrable near each endpoint.
pub fn kernel_basis(problem: &SLProblem) -> Result<KernelBasis> {
    let class_a = classify_endpoint(problem, Side::A)?;
    let class_b = classify_endpoint(problem, Side::B)?;
    let lo = computational_end(problem, &class_a);
    let hi = computational_end(problem, &class_b);
    let lp_a = class_a.kind == EndpointKind::LimitPoint;
    let lp_b = class_b.kind == EndpointKind::LimitPoint;
    let mid = anchor(problem);

    let mut candidates = Vec::new();
    match (lp_a, lp_b) {
        (false, false) => {
            for init in [(1.0, 0.0), (0.0, 1.0)] {
                let s = solve_tau_with(problem, 0.0, mid, init, lo, hi, KERNEL_RTOL)?;
                candidates.push(KernelSolution { solution: normalized(s), l2_at_a: true, l2_at_b: true });
            }
        }
        (true, false) => {
            let s = solve_toward(problem, &class_b, lo, recessive_seed(problem, Side::A, lo), lo, hi)?;
            let at_a = recessive_is_l2(problem, &class_a, &s, mid)?;
            candidates.push(KernelSolution { solution: normalized(s), l2_at_a: at_a, l2_at_b: true });
        }
        (false, true) => {
            let s = solve_toward(problem, &class_a, hi, recessive_seed(problem, Side::B, hi), lo, hi)?;
            let at_b = recessive_is_l2(problem, &class_b, &s, mid)?;
            candidates.push(KernelSolution { solution: normalized(s), l2_at_a: true, l2_at_b: at_b });
        }
        (true, true) => {
            let s = solve_tau_lenient(problem, 0.0, lo, recessive_seed(problem, Side::A, lo), lo, hi, KERNEL_RTOL)?;
            let data = s.eval(mid)?;
            let at_b = match l2_trend(problem, Side::B, 0.0, mid, data) {
                Trend::Converges => true,
                Trend::Diverges => false,
                Trend::Undecided => {
                    return Err(Error::Inconclusive {
                        endpoint: class_b.endpoint,
                        detail: "square integrability of the solution recessive at a".into(),
                    })
                }
            };
            candidates.push(KernelSolution { solution: normalized(s), l2_at_a: true, l2_at_b: at_b });
        }
    }
    let dimension = candidates.iter().filter(|c| c.is_l2()).count();
    Ok(KernelBasis { class_a, class_b, candidates, dimension })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaEstimate {
    pub zeta: f64,
    /// max - min of (Ku)/u over the sample.
    pub spread: f64,
    pub samples: usize,
    /// Set when the kernel is trivial and ζ was read off the solution
    /// recessive at a limit-point end instead of a kernel element.
    pub formal: bool,
}

/// Points in the middle 80% of a solution's range.
pub fn middle_sample(sol: &SolutionFn, n: usize) -> Vec<f64> {
    let (lo, hi) = (sol.lo(), sol.hi());
    let w = hi - lo;
    linspace(lo + 0.1 * w, hi - 0.1 * w, n)
}

/// ζ with Ku = ζu on a one-dimensional kernel.
pub fn k_eigenvalue_on_kernel(problem: &SLProblem, k: &KTransform) -> Result<ZetaEstimate> {
    let basis = kernel_basis(problem)?;
    let (sol, formal) = match (basis.dimension, basis.candidates.len()) {
        (1, _) => (basis.members()[0].clone(), false),
        (0, 1) => (basis.candidates[0].solution.clone(), true),
        (found, _) => return Err(Error::KernelDimension { found, expected: 1 }),
    };
    zeta_on(&sol, k, formal)
}

/// (Ku)(x)/u(x) sampled over the middle of the solution's range.
pub fn zeta_on(sol: &SolutionFn, k: &KTransform, formal: bool) -> Result<ZetaEstimate> {
    let xs = middle_sample(sol, 200);
    let mut ratios = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (u, _) = sol.eval(x)?;
        let (ku, _) = sol.eval(k.phi.eval(x))?;
        ratios.push(k.a.eval(x) * ku / u);
    }
    let (min, max) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let zeta = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = max - min;
    if !(spread <= 1e-8 * zeta.abs()) {
        return Err(Error::NonConstantRatio { zeta, spread });
    }
    Ok(ZetaEstimate { zeta, spread, samples: ratios.len(), formal })
}

/// How far Ku is from solving τy = 0: the data (Ku, (Ku)^{[1]}) at the
/// middle of the range is propagated as a solution and compared with Ku
/// elsewhere. Returns the maximal mismatch relative to max |Ku|.
pub fn image_solution_residual(problem: &SLProblem, k: &KTransform, sol: &SolutionFn) -> Result<f64> {
    let da = k.a.derivative();
    let dphi = k.phi_prime();
    let image = |x: f64| -> Result<(f64, f64)> {
        let t = k.phi.eval(x);
        let (u, u1) = sol.eval(t)?;
        let du = u1 / problem.p.eval(t);
        let y = k.a.eval(x) * u;
        let y1 = problem.p.eval(x) * (da.eval(x) * u + k.a.eval(x) * dphi.eval(x) * du);
        Ok((y, y1))
    };
    let xs = middle_sample(sol, 21);
    let x0 = xs[10];
    let start = image(x0)?;
    let prop = solve_tau_with(problem, 0.0, x0, start, xs[0], xs[20], KERNEL_RTOL)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in &xs {
        let (want, _) = image(x)?;
        let (got, _) = prop.eval(x)?;
        worst = worst.max((want - got).abs());
        scale = scale.max(want.abs());
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}
