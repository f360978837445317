use serde::Serialize;

use super::solve::system;
use crate::ktransform::SLProblem;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quad::GaussRule;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EndpointKind {
    Regular,
    LimitCircle,
    LimitPoint,
}

/// Outcome of a shell-by-shell convergence test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trend {
    Converges,
    Diverges,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointClass {
    pub side: Side,
    pub endpoint: f64,
    pub kind: EndpointKind,
    /// Integrability of r, 1/p, |q| up to the endpoint (finite endpoints only).
    pub coefficients: Option<[Trend; 3]>,
    /// Square-integrability of the solutions with data (1,0) and (0,1) at the anchor.
    pub solutions: Option<[Trend; 2]>,
}

/// Number of dyadic shells probed toward a finite endpoint.
pub const SHELL_LEVELS: usize = 32;
/// Unit-length steps probed toward an infinite endpoint.
pub const INFINITE_STEPS: usize = 40;
/// Window of trailing shells used for the decision.
const TREND_WINDOW: usize = 8;

/// Interior reference point of the interval.
pub fn anchor(problem: &SLProblem) -> f64 {
    let (a, b) = (problem.interval.a, problem.interval.b);
    match (a.is_finite(), b.is_finite()) {
        (true, true) => 0.5 * (a + b),
        (true, false) => a + 1.0,
        (false, true) => b - 1.0,
        (false, false) => 0.0,
    }
}

pub fn endpoint(problem: &SLProblem, side: Side) -> f64 {
    match side {
        Side::A => problem.interval.a,
        Side::B => problem.interval.b,
    }
}

/// Classify a sequence of non-negative increments ordered toward the endpoint.
pub fn shell_trend(incs: &[f64]) -> Trend {
    if incs.len() < TREND_WINDOW + 1 {
        return Trend::Undecided;
    }
    let total: f64 = incs.iter().sum();
    let tail = &incs[incs.len() - TREND_WINDOW..];
    if !total.is_finite() {
        return Trend::Diverges;
    }
    if tail.iter().all(|&v| v <= 1e-16 * total || v == 0.0) {
        return Trend::Converges;
    }
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().all(|&q| q <= 0.95) {
        return Trend::Converges;
    }
    if ratios.iter().all(|&q| q >= 0.98) {
        return Trend::Diverges;
    }
    Trend::Undecided
}

/// Shell boundaries from the anchor toward the endpoint.
pub(crate) fn shell_points(problem: &SLProblem, side: Side, from: f64) -> Vec<f64> {
    let d = endpoint(problem, side);
    let sign = if side == Side::A { -1.0 } else { 1.0 };
    if d.is_finite() {
        let eps0 = 0.5 * (d - from).abs();
        (0..=SHELL_LEVELS).map(|k| d - sign * eps0 * 0.5f64.powi(k as i32)).collect()
    } else {
        (0..=INFINITE_STEPS).map(|k| from + sign * (1.0 + k as f64)).collect()
    }
}

fn coefficient_trends(problem: &SLProblem, side: Side) -> [Trend; 3] {
    let pts = shell_points(problem, side, anchor(problem));
    let rule = GaussRule::new(20);
    let integrands: [&dyn Fn(f64) -> f64; 3] = [
        &|x| problem.r.eval(x).abs(),
        &|x| 1.0 / problem.p.eval(x).abs(),
        &|x| problem.q.eval(x).abs(),
    ];
    let mut out = [Trend::Undecided; 3];
    for (slot, f) in out.iter_mut().zip(integrands) {
        let incs: Vec<f64> = pts.windows(2).map(|w| rule.integrate(f, w[0].min(w[1]), w[0].max(w[1]))).collect();
        *slot = if incs.iter().any(|v| v.is_nan()) { Trend::Diverges } else { shell_trend(&incs) };
    }
    out
}

/// ∫|y|²r over successive shells toward the endpoint for the solution of
/// τy = zy with data `init` at `from`.
pub fn l2_trend(problem: &SLProblem, side: Side, z: f64, from: f64, init: (f64, f64)) -> Trend {
    let pts = shell_points(problem, side, from);
    let f = system(problem, z);
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-300, ..Default::default() };
    let mut state = [init.0, init.1, 0.0];
    let mut x = from;
    let mut incs = Vec::with_capacity(pts.len());
    for &target in &pts {
        match integrate(&f, x, state, target, &opts, &mut |_, s| s[0].abs() < 1e150) {
            Ok((reached, s)) => {
                if reached != target {
                    return Trend::Diverges;
                }
                let before = state[2];
                state = s;
                x = target;
                if target != pts[0] {
                    incs.push((s[2] - before).abs());
                }
            }
            Err(_) => break,
        }
    }
    shell_trend(&incs)
}

/// Regular / limit circle / limit point at one endpoint.
pub fn classify_endpoint(problem: &SLProblem, side: Side) -> Result<EndpointClass> {
    let d = endpoint(problem, side);
    let mut coefficients = None;
    if d.is_finite() {
        let trends = coefficient_trends(problem, side);
        coefficients = Some(trends);
        if trends.iter().all(|&t| t == Trend::Converges) {
            return Ok(EndpointClass { side, endpoint: d, kind: EndpointKind::Regular, coefficients, solutions: None });
        }
    }
    let from = anchor(problem);
    let sols = [l2_trend(problem, side, 0.0, from, (1.0, 0.0)), l2_trend(problem, side, 0.0, from, (0.0, 1.0))];
    let kind = if sols.iter().all(|&t| t == Trend::Converges) {
        EndpointKind::LimitCircle
    } else if sols.iter().any(|&t| t == Trend::Diverges) {
        EndpointKind::LimitPoint
    } else {
        return Err(Error::Inconclusive {
            endpoint: d,
            detail: format!("solution trends {sols:?}, coefficient trends {coefficients:?}"),
        });
    };
    Ok(EndpointClass { side, endpoint: d, kind, coefficients, solutions: Some(sols) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rules() {
        let geometric: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(shell_trend(&geometric), Trend::Converges);
        let flat = vec![1.0; 20];
        assert_eq!(shell_trend(&flat), Trend::Diverges);
        let growing: Vec<f64> = (0..20).map(|k| 1.2f64.powi(k)).collect();
        assert_eq!(shell_trend(&growing), Trend::Diverges);
        let zigzag: Vec<f64> = (0..20).map(|k| if k % 2 == 0 { 1.0 } else { 0.5 }).collect();
        assert_eq!(shell_trend(&zigzag), Trend::Undecided);
        assert_eq!(shell_trend(&[0.0; 20]), Trend::Converges);
    }
}
