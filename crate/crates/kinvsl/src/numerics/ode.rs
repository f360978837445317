//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-14, max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|t| t.is_finite())
}

fn scaled_norm<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (v[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// `on_step` sees every accepted step and may return `false` to stop early;
/// the state at the stopping point is returned together with its abscissa.
pub fn integrate<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    opts: &OdeOptions,
    on_step: &mut dyn FnMut(f64, &[f64; N]) -> bool,
) -> Result<(f64, [f64; N])> {
    if x1 == x0 {
        return Ok((x0, y0));
    }
    if (x1 - x0).abs() <= 64.0 * f64::EPSILON * x0.abs().max(x1.abs()) {
        // Below the resolution of x: one Euler step is exact to rounding.
        let d = f(x0, &y0);
        let mut y = y0;
        for i in 0..N {
            y[i] += (x1 - x0) * d[i];
        }
        if !all_finite(&y) {
            return Err(Error::OutsideDomain { x: x0 });
        }
        on_step(x1, &y);
        return Ok((x1, y));
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    if !all_finite(&k1) {
        return Err(Error::OutsideDomain { x });
    }

    // Initial step from the usual two-probe heuristic. Components that start
    // at zero would make a tiny atol dominate it, so the probe scale is floored.
    let zero = [0.0; N];
    let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let probe_opts = OdeOptions { atol: opts.atol.max(opts.rtol * ymax.max(1e-300)), ..*opts };
    let d0 = scaled_norm(&y, &y, &zero, &probe_opts);
    let d1 = scaled_norm(&k1, &y, &zero, &probe_opts);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let mut probe = y;
    for i in 0..N {
        probe[i] += dir * h0 * k1[i];
    }
    let kp = f(x + dir * h0, &probe);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = kp[i] - k1[i];
    }
    let d2 = if all_finite(&kp) { scaled_norm(&diff, &y, &zero, &probe_opts) / h0 } else { f64::INFINITY };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(span).max(1e-10 * span);

    let mut steps = 0usize;
    let mut k = [[0.0; N]; 7];
    loop {
        if steps >= opts.max_steps {
            return Err(Error::MaxIterations { what: "ode integration", limit: opts.max_steps });
        }
        steps += 1;
        let remaining = (x1 - x).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 16.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::StepUnderflow { reached: x });
        }
        let hs = dir * h;
        k[0] = k1;
        let mut ok = true;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                ys[i] += hs * acc;
            }
            k[s] = f(x + C[s] * hs, &ys);
            if !all_finite(&k[s]) {
                ok = false;
                break;
            }
        }
        let mut y_new = y;
        let mut err = [0.0; N];
        if ok {
            for i in 0..N {
                let mut acc = 0.0;
                let mut e = 0.0;
                for j in 0..6 {
                    acc += A[6][j] * k[j][i];
                }
                for j in 0..7 {
                    e += E[j] * k[j][i];
                }
                y_new[i] += hs * acc;
                err[i] = hs * e;
            }
            ok = all_finite(&y_new);
        }
        let en = if ok { scaled_norm(&err, &y, &y_new, opts) } else { f64::INFINITY };
        if en <= 1.0 {
            x = if last { x1 } else { x + hs };
            y = y_new;
            k1 = k[6];
            if !on_step(x, &y) || last {
                return Ok((x, y));
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.2 };
            h *= fac;
        }
    }
}
