use crate::{Error, Result};

/// Absolute tolerance on |f(x) - y|.
pub const TOL_ROOT: f64 = 1e-13;
pub const MAX_ITER: usize = 80;

/// Solve f(x) = y on a bracket with a sign change, using Newton steps that
/// fall back to bisection when they leave the bracket or stall.
///
/// A bracket that has shrunk to adjacent floating-point numbers is accepted
/// as converged even if the residual is above `TOL_ROOT`; steep functions
/// cannot do better in double precision.
pub fn invert_with(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    y: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut glo = f(lo) - y;
    let ghi = f(hi) - y;
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if !glo.is_finite() || !ghi.is_finite() || glo.signum() == ghi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut x = lo - glo * (hi - lo) / (ghi - glo);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let g = f(x) - y;
        if g.abs() <= TOL_ROOT {
            return Ok(x);
        }
        if !g.is_finite() {
            x = 0.5 * (lo + hi);
            continue;
        }
        if g.signum() == glo.signum() {
            lo = x;
            glo = g;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width <= f64::MIN_POSITIVE {
            return Ok(x);
        }
        let d = df(x);
        let mut next = x - g / d;
        let stalled = g.abs() > 0.5 * prev;
        if stalled || !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        prev = g.abs();
        x = next;
    }
    Err(Error::MaxIterations { what: "invert", limit: MAX_ITER })
}
