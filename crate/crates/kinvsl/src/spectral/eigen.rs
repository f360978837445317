//! Symmetric tridiagonal matrices with one optional corner entry linking
//! the first and last rows: Sturm counts by LDLᵀ with a Schur border, and
//! eigenvectors by inverse iteration.

use crate::{Error, Result};

/// Symmetric matrix: `diag`, `off` (off[i] couples i and i+1) and an
/// optional entry at (0, n-1).
#[derive(Clone, Debug)]
pub struct Bordered {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub corner: f64,
}

impl Bordered {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn has_border(&self) -> bool {
        self.corner != 0.0 && self.len() >= 3
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if self.corner != 0.0 && n >= 2 {
            if n == 2 {
                y[0] += self.corner * x[1];
                y[1] += self.corner * x[0];
            } else {
                y[0] += self.corner * x[n - 1];
                y[n - 1] += self.corner * x[0];
            }
        }
        y
    }

    /// ∞-norm bound.
    pub fn norm_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                if i == 0 || i == n - 1 {
                    s += self.corner.abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let n = self.len();
        let m = if self.has_border() { n - 1 } else { n };
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + self.norm_bound());
        let mut d = vec![0.0; m];
        let mut count = 0;
        for i in 0..m {
            let mut v = self.diag[i] - lambda;
            if i > 0 {
                v -= self.off[i - 1] * self.off[i - 1] / d[i - 1];
            }
            if v == 0.0 {
                v = -tiny;
            }
            if v < 0.0 {
                count += 1;
            }
            d[i] = v;
        }
        if !self.has_border() {
            return count;
        }
        // Schur complement of the last row: α - λ - cᵀ(T - λ)⁻¹c.
        let mut c = vec![0.0; m];
        c[0] += self.corner;
        c[m - 1] += self.off[m - 1];
        // Forward with L (unit lower, l_i = off[i-1]/d[i-1]), then D, then Lᵀ.
        let mut z = c.clone();
        for i in 1..m {
            z[i] -= self.off[i - 1] / d[i - 1] * z[i - 1];
        }
        let quad: f64 = (0..m).map(|i| z[i] * z[i] / d[i]).sum();
        let s = self.diag[n - 1] - lambda - quad;
        count + usize::from(s < 0.0 || s == 0.0)
    }

    /// Gershgorin interval.
    fn spectrum_bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            if i == 0 || i == n - 1 {
                r += self.corner.abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.spectrum_bounds();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 2.0 * f64::EPSILON * mid.abs() + 1e-4 * f64::EPSILON * scale || mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve (A - σ)x = b: banded LU with partial pivoting on the
    /// tridiagonal part and block elimination of the border.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if !self.has_border() {
            let mut t = self.clone();
            if n == 2 {
                t.off[0] += t.corner;
            }
            t.corner = 0.0;
            return tridiagonal_solve(&t.diag, &t.off, sigma, b);
        }
        let m = n - 1;
        let (dg, of) = (&self.diag[..m], &self.off[..m - 1]);
        let mut c = vec![0.0; m];
        c[0] += self.corner;
        c[m - 1] += self.off[m - 1];
        let z = tridiagonal_solve(dg, of, sigma, &c)?;
        let w = tridiagonal_solve(dg, of, sigma, &b[..m])?;
        let ctz: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
        let ctw: f64 = c.iter().zip(&w).map(|(a, b)| a * b).sum();
        let mut s = self.diag[m] - sigma - ctz;
        if s == 0.0 {
            s = f64::EPSILON * (1.0 + self.norm_bound());
        }
        let last = (b[m] - ctw) / s;
        let mut x: Vec<f64> = (0..m).map(|i| w[i] - z[i] * last).collect();
        x.push(last);
        Ok(x)
    }
}

/// (T - σ)x = b for symmetric tridiagonal T, Gaussian elimination with
/// partial pivoting (second superdiagonal fill).
fn tridiagonal_solve(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 1 {
        let d = diag[0] - sigma;
        let d = if d == 0.0 { f64::EPSILON } else { d };
        return Ok(vec![b[0] / d]);
    }
    let scale = diag.iter().chain(off).fold(sigma.abs(), |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    // Rows: (u0, u1, u2) = entries at columns i, i+1, i+2 after elimination.
    let mut u0: Vec<f64> = diag.iter().map(|d| d - sigma).collect();
    let mut u1: Vec<f64> = off.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut lower: Vec<f64> = off.to_vec();
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if lower[i].abs() > u0[i].abs() {
            // Swap rows i and i+1.
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            u0[i] = lower[i];
            u1[i] = u0[i + 1];
            u2[i] = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
            lower[i] = a0;
            u0[i + 1] = a1;
            if i + 1 < n - 1 {
                u1[i + 1] = a2;
            }
            rhs.swap(i, i + 1);
        }
        if u0[i] == 0.0 {
            u0[i] = f64::EPSILON * scale;
        }
        let l = lower[i] / u0[i];
        u0[i + 1] -= l * u1[i];
        if i + 1 < n - 1 {
            u1[i + 1] -= l * u2[i];
        }
        rhs[i + 1] -= l * rhs[i];
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = f64::EPSILON * scale;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / u0[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solve("shifted tridiagonal system is singular".into()));
    }
    Ok(x)
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Smallest `count` eigenpairs (eigenvalue, unit eigenvector, residual ‖Ax - λx‖).
pub fn smallest_pairs(a: &Bordered, count: usize) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let n = a.len();
    let count = count.min(n);
    let norm = a.norm_bound().max(1.0);
    let mut out: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(count);
    for k in 0..count {
        let mut lambda = a.eigenvalue(k);
        let sigma = lambda + 4.0 * f64::EPSILON * norm;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7 + k * 13) % 17) as f64 / 17.0).collect();
        normalize(&mut x);
        let mut residual = f64::INFINITY;
        for _ in 0..6 {
            let mut y = a.solve_shifted(sigma, &x)?;
            // Deflate earlier vectors of (numerically) equal eigenvalues.
            for (mu, v, _) in &out {
                if (mu - lambda).abs() <= 1e-10 * norm {
                    let dot: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
                    y.iter_mut().zip(v).for_each(|(yi, vi)| *yi -= dot * vi);
                }
            }
            if normalize(&mut y) == 0.0 {
                return Err(Error::MaxIterations { what: "inverse iteration", limit: 6 });
            }
            x = y;
            let ax = a.mul(&x);
            // Rayleigh quotient: recovers digits the Sturm count loses near
            // multiple eigenvalues.
            lambda = ax.iter().zip(&x).map(|(p, q)| p * q).sum();
            residual = ax.iter().zip(&x).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt();
            if residual <= 1e-14 * norm {
                break;
            }
        }
        if !(residual <= 1e-10 * norm) {
            return Err(Error::MaxIterations { what: "inverse iteration", limit: 6 });
        }
        out.push((lambda, x, residual));
    }
    Ok(out)
}
