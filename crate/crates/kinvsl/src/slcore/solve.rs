use crate::ktransform::SLProblem;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::{Error, Result};

/// Right-hand side of the quasi-derivative system for τy = zy, augmented
/// with the running integral of |y|² r.
pub(crate) fn system(problem: &SLProblem, z: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
    move |x, s| {
        let (p, q, r) = (problem.p.eval(x), problem.q.eval(x), problem.r.eval(x));
        [s[1] / p, (q - z * r) * s[0], s[0] * s[0] * r]
    }
}

/// Numerical solution of τy = zy carrying (y, y^{[1]}) on its integration nodes.
#[derive(Clone, Debug)]
pub struct SolutionFn {
    problem: SLProblem,
    z: f64,
    rtol: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    y1s: Vec<f64>,
    /// ∫ |y|² r from the first node.
    l2: Vec<f64>,
}

/// Integrate from `x0` with data `init = (y, y^{[1]})` across [lo, hi].
pub fn solve_tau(problem: &SLProblem, z: f64, x0: f64, init: (f64, f64), lo: f64, hi: f64) -> Result<SolutionFn> {
    solve_tau_with(problem, z, x0, init, lo, hi, 1e-10)
}

pub fn solve_tau_with(
    problem: &SLProblem,
    z: f64,
    x0: f64,
    init: (f64, f64),
    lo: f64,
    hi: f64,
    rtol: f64,
) -> Result<SolutionFn> {
    solve_impl(problem, z, x0, init, lo, hi, rtol, false)
}

/// Like [`solve_tau_with`], but a solution that blows up (|y| > 1e150) or
/// stalls against a singularity keeps the range reached so far.
pub fn solve_tau_lenient(
    problem: &SLProblem,
    z: f64,
    x0: f64,
    init: (f64, f64),
    lo: f64,
    hi: f64,
    rtol: f64,
) -> Result<SolutionFn> {
    solve_impl(problem, z, x0, init, lo, hi, rtol, true)
}

/// Magnitude at which a lenient solve stops.
pub const BLOW_UP: f64 = 1e150;

#[allow(clippy::too_many_arguments)]
fn solve_impl(
    problem: &SLProblem,
    z: f64,
    x0: f64,
    init: (f64, f64),
    lo: f64,
    hi: f64,
    rtol: f64,
    lenient: bool,
) -> Result<SolutionFn> {
    if !(lo <= x0 && x0 <= hi) {
        return Err(Error::Input(format!("start point {x0} outside [{lo}, {hi}]")));
    }
    let opts = OdeOptions { rtol, atol: 1e-300, ..Default::default() };
    let f = system(problem, z);
    let start = [init.0, init.1, 0.0];

    let sweep = |to: f64| -> Result<Vec<(f64, [f64; 3])>> {
        let mut out = Vec::new();
        if to == x0 {
            return Ok(out);
        }
        let res = integrate(&f, x0, start, to, &opts, &mut |x, s| {
            out.push((x, *s));
            !lenient || s[0].abs() < BLOW_UP
        });
        match res {
            Ok(_) => Ok(out),
            Err(Error::StepUnderflow { .. } | Error::MaxIterations { .. }) if lenient => Ok(out),
            Err(e) => Err(e),
        }
    };
    let left = sweep(lo)?;
    let right = sweep(hi)?;
    let mut nodes: Vec<(f64, [f64; 3])> = left.into_iter().rev().collect();
    nodes.push((x0, start));
    nodes.extend(right);
    let base = nodes[0].1[2];
    Ok(SolutionFn {
        problem: problem.clone(),
        z,
        rtol,
        xs: nodes.iter().map(|n| n.0).collect(),
        ys: nodes.iter().map(|n| n.1[0]).collect(),
        y1s: nodes.iter().map(|n| n.1[1]).collect(),
        l2: nodes.iter().map(|n| n.1[2] - base).collect(),
    })
}

impl SolutionFn {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn problem(&self) -> &SLProblem {
        &self.problem
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn quasi_values(&self) -> &[f64] {
        &self.y1s
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// ∫ |y|² r over the whole integration range.
    pub fn l2_total(&self) -> f64 {
        self.l2[self.l2.len() - 1]
    }

    /// (y, y^{[1]}) at any x in range, re-integrated from the nearest node.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= self.lo() && x <= self.hi()) {
            return Err(Error::OutsideDomain { x });
        }
        let i = self.xs.partition_point(|&t| t < x);
        let k = if i == 0 {
            0
        } else if i >= self.xs.len() {
            self.xs.len() - 1
        } else if (self.xs[i] - x).abs() < (x - self.xs[i - 1]).abs() {
            i
        } else {
            i - 1
        };
        if self.xs[k] == x {
            return Ok((self.ys[k], self.y1s[k]));
        }
        let f = system(&self.problem, self.z);
        let g = |t: f64, s: &[f64; 2]| {
            let full = f(t, &[s[0], s[1], 0.0]);
            [full[0], full[1]]
        };
        let opts = OdeOptions { rtol: self.rtol, atol: 1e-300, ..Default::default() };
        let (_, s) = integrate(&g, self.xs[k], [self.ys[k], self.y1s[k]], x, &opts, &mut |_, _| true)?;
        Ok((s[0], s[1]))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).map(|v| v.0).unwrap_or(f64::NAN)
    }

    /// Multiply by a constant.
    pub fn scaled(&self, c: f64) -> SolutionFn {
        let mut out = self.clone();
        out.ys.iter_mut().for_each(|v| *v *= c);
        out.y1s.iter_mut().for_each(|v| *v *= c);
        out.l2.iter_mut().for_each(|v| *v *= c * c);
        out
    }
}

/// W(f, g)(x) = f g^{[1]} - f^{[1]} g.
pub fn wronskian(f: &SolutionFn, g: &SolutionFn, x: f64) -> Result<f64> {
    let (fy, f1) = f.eval(x)?;
    let (gy, g1) = g.eval(x)?;
    Ok(fy * g1 - f1 * gy)
}
