//! Finite-volume discretization of τ with separated or coupled (η = 0)
//! boundary conditions, the smallest eigenvalues of the resulting pencil,
//! and the two spectral checks: the Krein zero mode and invariance of
//! eigenfunctions under K.

mod eigen;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use eigen::{smallest_pairs, Bordered};

use crate::extensions::{boundary_residual, canonical_angle, robin_parameter, Mat2};
use crate::ktransform::{KTransform, SLProblem};
use crate::slcore::{kernel_basis, Side};
use crate::{Error, Result};

/// Boundary condition at one end, as an angle of cos·g + sin·g^{[1]} (at a)
/// or cos·g - sin·g^{[1]} (at b). `Cap` is a Dirichlet condition placed
/// where a singular or infinite end is cut off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EndCondition {
    Angle(f64),
    Cap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BoundaryCondition {
    Separated { a: EndCondition, b: EndCondition },
    /// (g(b), g^{[1]}(b)) = R (g(a), g^{[1]}(a)) with det R = 1.
    Coupled { r: Mat2 },
}

impl BoundaryCondition {
    pub fn dirichlet() -> BoundaryCondition {
        BoundaryCondition::Separated { a: EndCondition::Angle(0.0), b: EndCondition::Angle(0.0) }
    }

    pub fn separated(a: EndCondition, b: EndCondition) -> BoundaryCondition {
        BoundaryCondition::Separated { a, b }
    }
}

fn parse_end(s: &str) -> Result<EndCondition> {
    let bad = || Error::Input(format!("unknown end condition {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    match s.trim() {
        "dirichlet" => Ok(EndCondition::Angle(0.0)),
        "neumann" => Ok(EndCondition::Angle(std::f64::consts::FRAC_PI_2)),
        "cap" => Ok(EndCondition::Cap),
        t => match t.split_once(':') {
            Some(("angle", v)) => Ok(EndCondition::Angle(canonical_angle(num(v)?))),
            _ => Err(bad()),
        },
    }
}

/// Angle of the Robin condition g^{[1]}(d) = μ g(d).
pub fn robin_angle(mu: f64, side: Side) -> f64 {
    // a: μ = -cot α; b: μ = cot β.
    let cot = match side {
        Side::A => -mu,
        Side::B => mu,
    };
    canonical_angle((1.0f64).atan2(cot))
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    /// `a=<end>,b=<end>` with `<end>` one of dirichlet, neumann, cap,
    /// angle:<radians>, robin:<μ>; or `coupled=r11:r12:r21:r22`.
    fn from_str(s: &str) -> Result<BoundaryCondition> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("coupled=") {
            let v: Vec<f64> = rest
                .split(':')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Input(format!("bad coupled matrix {rest:?}")))?;
            if v.len() != 4 {
                return Err(Error::Input("coupled condition needs four entries".into()));
            }
            return Ok(BoundaryCondition::Coupled { r: [[v[0], v[1]], [v[2], v[3]]] });
        }
        let mut a = None;
        let mut b = None;
        for part in s.split(',') {
            let (side, end) = part.split_once('=').ok_or_else(|| Error::Input(format!("bad boundary spec {part:?}")))?;
            let robin = end.trim().strip_prefix("robin:");
            let cond = |sd: Side| -> Result<EndCondition> {
                match robin {
                    Some(v) => {
                        let mu = v.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad Robin value {v:?}")))?;
                        Ok(EndCondition::Angle(robin_angle(mu, sd)))
                    }
                    None => parse_end(end),
                }
            };
            match side.trim() {
                "a" => a = Some(cond(Side::A)?),
                "b" => b = Some(cond(Side::B)?),
                other => return Err(Error::Input(format!("unknown side {other:?}"))),
            }
        }
        match (a, b) {
            (Some(a), Some(b)) => Ok(BoundaryCondition::Separated { a, b }),
            _ => Err(Error::Input(format!("boundary spec {s:?} must name both ends"))),
        }
    }
}

impl fmt::Display for EndCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndCondition::Cap => write!(f, "cap"),
            EndCondition::Angle(a) if *a == 0.0 => write!(f, "dirichlet"),
            EndCondition::Angle(a) if *a == std::f64::consts::FRAC_PI_2 => write!(f, "neumann"),
            EndCondition::Angle(a) => write!(f, "angle:{a:.12e}"),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Separated { a, b } => write!(f, "a={a},b={b}"),
            BoundaryCondition::Coupled { r } => {
                write!(f, "coupled={:.12e}:{:.12e}:{:.12e}:{:.12e}", r[0][0], r[0][1], r[1][0], r[1][1])
            }
        }
    }
}

/// Where singular and infinite ends are cut off.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Truncation {
    /// Distance of the cap from a finite singular end, relative to the width.
    pub eps: f64,
    /// Working length for infinite ends.
    pub length: f64,
}

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_LENGTH: f64 = 20.0;
/// Growth of the spacing away from a cut-off singular end.
pub const GRADING_RATIO: f64 = 1.02;

impl Truncation {
    pub fn for_problem(problem: &SLProblem) -> Truncation {
        Truncation { eps: DEFAULT_EPS, length: problem.truncation.unwrap_or(DEFAULT_LENGTH) }
    }
}

/// Computational interval and whether each end is graded.
fn computational_ends(problem: &SLProblem, trunc: &Truncation) -> Result<(f64, f64, bool, bool)> {
    let (a, b) = (problem.interval.a, problem.interval.b);
    let (lo, hi) = match (a.is_finite(), b.is_finite()) {
        (true, true) => (a, b),
        (true, false) => (a, a + trunc.length),
        (false, true) => (b - trunc.length, b),
        (false, false) => (-trunc.length, trunc.length),
    };
    let w = hi - lo;
    let grade_a = a.is_finite() && problem.is_singular_at(a);
    let grade_b = b.is_finite() && problem.is_singular_at(b);
    let lo = if grade_a { lo + trunc.eps * w } else { lo };
    let hi = if grade_b { hi - trunc.eps * w } else { hi };
    if !(lo < hi) {
        return Err(Error::Input("truncation leaves an empty interval".into()));
    }
    Ok((lo, hi, grade_a, grade_b))
}

fn march(lo: f64, hi: f64, ends: (Option<f64>, Option<f64>), h_max: f64) -> Vec<f64> {
    let g = GRADING_RATIO - 1.0;
    let mut xs = vec![lo];
    let mut x = lo;
    while x < hi {
        let mut h = h_max;
        if let Some(d) = ends.0 {
            h = h.min(g * (x - d));
        }
        if let Some(d) = ends.1 {
            h = h.min(g * (d - x).max(0.0)).max(g * (d - hi));
        }
        x += h;
        xs.push(x);
        if xs.len() > 50_000_000 {
            break;
        }
    }
    xs
}

/// N intervals on [lo, hi], uniform unless an end is graded, in which case
/// spacing grows geometrically (ratio 1.02) away from it up to a cap.
pub fn grid(lo: f64, hi: f64, n: usize, graded: (Option<f64>, Option<f64>)) -> Vec<f64> {
    let uniform = |n: usize| (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect::<Vec<f64>>();
    if graded.0.is_none() && graded.1.is_none() {
        return uniform(n);
    }
    let (mut h_lo, mut h_hi) = (1e-16 * (hi - lo), hi - lo);
    let mut best = march(lo, hi, graded, h_hi);
    for _ in 0..200 {
        let h = (h_lo * h_hi).sqrt();
        let xs = march(lo, hi, graded, h);
        let m = xs.len() - 1;
        best = xs;
        if m == n {
            break;
        }
        if m > n {
            h_lo = h;
        } else {
            h_hi = h;
        }
        if h_hi / h_lo < 1.0 + 1e-14 {
            break;
        }
    }
    // Snap the overshoot by stretching the last interval onto hi.
    let m = best.len() - 1;
    best[m] = hi;
    if m >= 1 && best[m - 1] >= hi {
        best.pop();
        let k = best.len() - 1;
        best[k] = hi;
    }
    best
}

/// Discretized extension: the pencil (stiffness, weight) on the unknowns.
#[derive(Clone, Debug)]
pub struct DiscreteExtension {
    pub problem: SLProblem,
    pub bc: BoundaryCondition,
    pub truncation: Truncation,
    /// Every grid node, boundary nodes included.
    pub nodes: Vec<f64>,
    /// Unknown index and factor for each node; None for Dirichlet nodes.
    pub map: Vec<Option<(usize, f64)>>,
    pub stiffness: Bordered,
    /// Diagonal of the (lumped) weight matrix, r times cell size.
    pub weight: Vec<f64>,
}

fn add_entry(m: &mut Bordered, i: usize, j: usize, v: f64) -> Result<()> {
    let n = m.len();
    let (lo, hi) = (i.min(j), i.max(j));
    if lo == hi {
        m.diag[lo] += v;
    } else if hi == lo + 1 {
        // Symmetric entries arrive twice; store once.
        if i < j {
            m.off[lo] += v;
        }
    } else if lo == 0 && hi == n - 1 {
        if i < j {
            m.corner += v;
        }
    } else {
        return Err(Error::Input("boundary coupling produced an unsupported sparsity pattern".into()));
    }
    Ok(())
}

/// Assemble the finite-volume pencil: row i carries
/// p_{i+1/2}(y_i - y_{i+1})/h_i + p_{i-1/2}(y_i - y_{i-1})/h_{i-1} + q_i V_i y_i
/// against r_i V_i y_i, V_i the dual cell; boundary rows pick up ±g^{[1]}.
pub fn discretize(problem: &SLProblem, bc: BoundaryCondition, n: usize, trunc: Truncation) -> Result<DiscreteExtension> {
    if n < 4 {
        return Err(Error::Input("at least four intervals are needed".into()));
    }
    let (lo, hi, grade_a, grade_b) = computational_ends(problem, &trunc)?;
    let graded = (grade_a.then_some(problem.interval.a), grade_b.then_some(problem.interval.b));
    let nodes = grid(lo, hi, n, graded);
    let last = nodes.len() - 1;
    let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let flux: Vec<f64> = nodes
        .windows(2)
        .zip(&h)
        .map(|(w, hk)| {
            let p = problem.p.eval(0.5 * (w[0] + w[1]));
            if p.is_finite() && p > 0.0 {
                Ok(p / hk)
            } else {
                Err(Error::OutsideDomain { x: 0.5 * (w[0] + w[1]) })
            }
        })
        .collect::<Result<_>>()?;
    let cell: Vec<f64> = (0..=last)
        .map(|i| 0.5 * (if i > 0 { h[i - 1] } else { 0.0 } + if i < last { h[i] } else { 0.0 }))
        .collect();
    let mut diag: Vec<f64> = (0..=last)
        .map(|i| {
            let q = problem.q.eval(nodes[i]);
            let s = if i > 0 { flux[i - 1] } else { 0.0 } + if i < last { flux[i] } else { 0.0 };
            s + q * cell[i]
        })
        .collect();
    let off: Vec<f64> = flux.iter().map(|f| -f).collect();
    let mass: Vec<f64> = (0..=last).map(|i| problem.r.eval(nodes[i]) * cell[i]).collect();
    if diag.iter().chain(&mass).any(|v| !v.is_finite()) || mass.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::Validation("coefficients are not finite or r is not positive on the grid".into()));
    }
    let mut corner = Vec::new();
    let mut map: Vec<Option<(usize, f64)>> = (0..=last).map(|i| Some((i, 1.0))).collect();
    match bc {
        BoundaryCondition::Separated { a, b } => {
            for (end, side, idx) in [(a, Side::A, 0), (b, Side::B, last)] {
                match end {
                    EndCondition::Cap => map[idx] = None,
                    EndCondition::Angle(t) => {
                        let t = canonical_angle(t);
                        if t == 0.0 {
                            map[idx] = None;
                        } else {
                            // +g^{[1]}(a) in row 0 and -g^{[1]}(b) in the last row.
                            let mu = robin_parameter(t, side);
                            diag[idx] += if side == Side::A { mu } else { -mu };
                        }
                    }
                }
            }
        }
        BoundaryCondition::Coupled { r } => {
            let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
            if (det - 1.0).abs() > 1e-10 {
                return Err(Error::Input(format!("coupled matrix has determinant {det}, expected 1")));
            }
            if r[0][1] != 0.0 {
                diag[0] -= r[0][0] / r[0][1];
                diag[last] -= r[1][1] / r[0][1];
                corner.push((0, last, 1.0 / r[0][1]));
                corner.push((last, 0, 1.0 / r[0][1]));
            } else {
                // g(b) = R11 g(a): the last node is slaved to the first.
                diag[0] -= r[0][0] * r[1][0];
                map[last] = Some((0, r[0][0]));
            }
        }
    }
    // Renumber free nodes in order; a slaved node keeps its master's index.
    let mut next = 0;
    let mut index = vec![usize::MAX; last + 1];
    for i in 0..=last {
        if let Some((j, _)) = map[i] {
            if j == i {
                index[i] = next;
                next += 1;
            }
        }
    }
    for slot in map.iter_mut() {
        if let Some((j, f)) = *slot {
            *slot = Some((index[j], f));
        }
    }
    let m = next;
    if m < 2 {
        return Err(Error::Input("too few unknowns after boundary conditions".into()));
    }
    let mut stiffness = Bordered { diag: vec![0.0; m], off: vec![0.0; m - 1], corner: 0.0 };
    let mut weight = vec![0.0; m];
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(3 * (last + 1));
    for i in 0..=last {
        entries.push((i, i, diag[i]));
        if i < last {
            entries.push((i, i + 1, off[i]));
            entries.push((i + 1, i, off[i]));
        }
    }
    entries.extend(corner);
    for (i, j, v) in entries {
        if let (Some((ui, fi)), Some((uj, fj))) = (map[i], map[j]) {
            add_entry(&mut stiffness, ui, uj, fi * fj * v)?;
        }
    }
    for i in 0..=last {
        if let Some((u, f)) = map[i] {
            weight[u] += f * f * mass[i];
        }
    }
    Ok(DiscreteExtension { problem: problem.clone(), bc, truncation: trunc, nodes, map, stiffness, weight })
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigenpair {
    pub value: f64,
    /// Node values (Dirichlet nodes are zero), normalized in the discrete L²_r norm.
    pub vector: Vec<f64>,
    /// ‖Kv - λWv‖ / ‖v‖ for the pencil.
    pub residual: f64,
}

impl DiscreteExtension {
    pub fn unknowns(&self) -> usize {
        self.weight.len()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// W^{-1/2} K W^{-1/2}.
    pub fn standardized(&self) -> Bordered {
        let s: Vec<f64> = self.weight.iter().map(|w| 1.0 / w.sqrt()).collect();
        let n = s.len();
        Bordered {
            diag: (0..n).map(|i| self.stiffness.diag[i] * s[i] * s[i]).collect(),
            off: (0..n - 1).map(|i| self.stiffness.off[i] * s[i] * s[i + 1]).collect(),
            corner: self.stiffness.corner * s[0] * s[n - 1],
        }
    }

    /// Node values from unknowns.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.map.iter().map(|m| m.map_or(0.0, |(j, f)| f * u[j])).collect()
    }

    /// Unknowns from node values (slaved and Dirichlet nodes dropped).
    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.unknowns()];
        for (i, m) in self.map.iter().enumerate() {
            if let Some((j, f)) = m {
                if *f == 1.0 {
                    out[*j] = values[i];
                }
            }
        }
        out
    }

    /// Solve K y = W f on the unknowns, f and y as node values.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        let fu = self.restrict(f);
        let rhs: Vec<f64> = fu.iter().zip(&self.weight).map(|(a, w)| a * w).collect();
        Ok(self.expand(&self.stiffness.solve_shifted(0.0, &rhs)?))
    }

    /// Discrete L²_r inner product of node vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let fu = self.restrict(f);
        let gu = self.restrict(g);
        fu.iter().zip(&gu).zip(&self.weight).map(|((a, b), w)| a * b * w).sum()
    }
}

/// Smallest `count` eigenpairs of the pencil (count ≤ 10).
pub fn eigen_smallest(dx: &DiscreteExtension, count: usize) -> Result<Vec<Eigenpair>> {
    if count > 10 {
        return Err(Error::Input("at most 10 eigenvalues are supported".into()));
    }
    let a = dx.standardized();
    let pairs = smallest_pairs(&a, count)?;
    Ok(pairs
        .into_iter()
        .map(|(value, x, _)| {
            let u: Vec<f64> = x.iter().zip(&dx.weight).map(|(xi, w)| xi / w.sqrt()).collect();
            let ku = dx.stiffness.mul(&u);
            let res = ku.iter().zip(&u).zip(&dx.weight).map(|((k, v), w)| (k - value * w * v).powi(2)).sum::<f64>();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut vector = dx.expand(&u);
            // Fix the sign so the vector is positive where it is largest.
            let big = vector.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            if big < 0.0 {
                vector.iter_mut().for_each(|v| *v = -*v);
            }
            Eigenpair { value, vector, residual: res.sqrt() / norm }
        })
        .collect())
}

/// Four-point Lagrange interpolation of node data.
pub fn local_interp(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let n = xs.len();
    let tol = 1e-12 * (xs[n - 1] - xs[0]);
    if !(x >= xs[0] - tol && x <= xs[n - 1] + tol) {
        return Err(Error::OutsideDomain { x });
    }
    let k = xs.partition_point(|&t| t < x).clamp(2, n - 2) - 2;
    let k = k.min(n - 4);
    let mut v = 0.0;
    for i in k..k + 4 {
        let mut l = 1.0;
        for j in k..k + 4 {
            if j != i {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        v += l * ys[i];
    }
    Ok(v)
}

/// Value and quasi-derivative at the computational end of `side`, from
/// node values (second-order one-sided difference).
pub fn boundary_data(dx: &DiscreteExtension, values: &[f64], side: Side) -> (f64, f64) {
    let n = dx.nodes.len();
    let (i0, i1, i2) = match side {
        Side::A => (0, 1, 2),
        Side::B => (n - 1, n - 2, n - 3),
    };
    let (x0, x1, x2) = (dx.nodes[i0], dx.nodes[i1], dx.nodes[i2]);
    let (y0, y1, y2) = (values[i0], values[i1], values[i2]);
    let (h1, h2) = (x1 - x0, x2 - x0);
    let d = y0 * (-(h1 + h2) / (h1 * h2)) + y1 * (h2 / (h1 * (h2 - h1))) + y2 * (-h1 / (h2 * (h2 - h1)));
    (y0, dx.problem.p.eval(x0) * d)
}

/// Boundary-condition residual of K·u, u a node vector of `dx`.
pub fn eigenfunction_invariance_check(dx: &DiscreteExtension, k: &KTransform, eigvec: &[f64]) -> Result<f64> {
    let n = dx.nodes.len();
    let image = |idx: &[usize]| -> Result<Vec<(usize, f64)>> {
        idx.iter()
            .map(|&i| {
                let x = dx.nodes[i];
                let t = k.phi.eval(x);
                Ok((i, k.a.eval(x) * local_interp(&dx.nodes, eigvec, t)?))
            })
            .collect()
    };
    let mut ku = vec![0.0; n];
    for (i, v) in image(&[0, 1, 2, n - 3, n - 2, n - 1])? {
        ku[i] = v;
    }
    let (ga, gb) = (boundary_data(dx, &ku, Side::A), boundary_data(dx, &ku, Side::B));
    match dx.bc {
        BoundaryCondition::Separated { a, b } => {
            let mut worst: f64 = 0.0;
            // Caps stand in for limit-point ends, where no condition is owed.
            for (end, side, g) in [(a, Side::A, ga), (b, Side::B, gb)] {
                if let EndCondition::Angle(t) = end {
                    worst = worst.max(boundary_residual(t, side, g.0, g.1));
                }
            }
            Ok(worst)
        }
        BoundaryCondition::Coupled { r } => {
            let want = [r[0][0] * ga.0 + r[0][1] * ga.1, r[1][0] * ga.0 + r[1][1] * ga.1];
            let err = (gb.0 - want[0]).hypot(gb.1 - want[1]);
            Ok(err / (ga.0.hypot(ga.1) + gb.0.hypot(gb.1)).max(f64::MIN_POSITIVE))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KreinCheck {
    pub bc: String,
    /// Residual of the kernel element against the condition.
    pub boundary_residual: f64,
    /// (intervals, λ₁) under doubling.
    pub lambdas: Vec<(usize, f64)>,
    pub first_order: bool,
    pub pass: bool,
}

/// Below this |λ₁| the zero mode counts as resolved.
pub const ZERO_FLOOR: f64 = 1e-8;
pub const KREIN_RESIDUAL_TOL: f64 = 1e-8;

/// Does the kernel element satisfy `bc`, and does λ₁ of the discretized
/// extension go to zero at least linearly in h?
pub fn krein_zero_mode_check(
    problem: &SLProblem,
    bc: BoundaryCondition,
    n: usize,
    trunc: Truncation,
) -> Result<KreinCheck> {
    let basis = kernel_basis(problem)?;
    if basis.dimension != 1 {
        return Err(Error::KernelDimension { found: basis.dimension, expected: 1 });
    }
    let u = basis.members()[0];
    let mut residual: f64 = 0.0;
    if let BoundaryCondition::Separated { a, b } = bc {
        for (end, side, at) in [(a, Side::A, u.lo()), (b, Side::B, u.hi())] {
            if let EndCondition::Angle(t) = end {
                let (v, q) = u.eval(at)?;
                residual = residual.max(boundary_residual(t, side, v, q));
            }
        }
    } else {
        return Err(Error::Input("the Krein check takes a separated condition".into()));
    }
    let lambdas = [n, 2 * n, 4 * n]
        .par_iter()
        .map(|&m| -> Result<(usize, f64)> {
            let dx = discretize(problem, bc, m, trunc)?;
            Ok((dx.intervals(), eigen_smallest(&dx, 1)?[0].value))
        })
        .collect::<Result<Vec<_>>>()?;
    let first_order = lambdas.windows(2).all(|w| w[1].1.abs() <= 0.55 * w[0].1.abs() || w[1].1.abs() <= ZERO_FLOOR);
    let pass = residual <= KREIN_RESIDUAL_TOL && first_order;
    Ok(KreinCheck { bc: bc.to_string(), boundary_residual: residual, lambdas, first_order, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub length: f64,
    pub bc: String,
    pub index: usize,
    pub lambda: f64,
    pub residual: f64,
}

/// Eigenvalue table over several grid sizes, computed concurrently.
pub fn spectrum_table(
    problem: &SLProblem,
    bc: BoundaryCondition,
    sizes: &[usize],
    trunc: Truncation,
    count: usize,
) -> Result<Vec<SpectrumRow>> {
    let blocks = sizes
        .par_iter()
        .map(|&n| -> Result<Vec<SpectrumRow>> {
            let dx = discretize(problem, bc, n, trunc)?;
            let pairs = eigen_smallest(&dx, count)?;
            Ok(pairs
                .into_iter()
                .enumerate()
                .map(|(i, p)| SpectrumRow {
                    n: dx.intervals(),
                    length: trunc.length,
                    bc: bc.to_string(),
                    index: i + 1,
                    lambda: p.value,
                    residual: p.residual,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("N,L,bc,index,lambda,residual\n");
    for r in rows {
        out.push_str(&format!("{},{:.12e},\"{}\",{},{:.12e},{:.12e}\n", r.n, r.length, r.bc, r.index, r.lambda, r.residual));
    }
    out
}

#[cfg(test)]
mod tests;
