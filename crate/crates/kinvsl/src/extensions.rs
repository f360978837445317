//! Which self-adjoint extensions does K leave invariant? Boundary data
//! (f(d), f^{[1]}(d)) of Kf is M_d applied to that of f, so a boundary
//! condition is invariant exactly when M_d maps its solution set into itself.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use serde::Serialize;

use crate::funcalg::ExprFn;
use crate::ktransform::{KTransform, SLProblem};
use crate::slcore::{classify_endpoint, kernel_basis, EndpointClass, EndpointKind, Side, SolutionFn};
use crate::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

/// Tolerance for angle and matrix identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance when comparing an angle read off a numerical solution.
pub const KERNEL_ANGLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryTransform {
    pub side: Side,
    pub endpoint: f64,
    pub a: f64,
    pub a_quasi: f64,
    pub phi_prime: f64,
    /// [[A, 0], [A^{[1]}, A φ']].
    pub matrix: Mat2,
}

impl BoundaryTransform {
    pub fn from_values(side: Side, endpoint: f64, a: f64, a_quasi: f64, phi_prime: f64) -> BoundaryTransform {
        BoundaryTransform { side, endpoint, a, a_quasi, phi_prime, matrix: [[a, 0.0], [a_quasi, a * phi_prime]] }
    }

    pub fn det(&self) -> f64 {
        self.a * self.a * self.phi_prime
    }
}

/// Limit of f at `d` from inside, read off dyadic approach points when f(d)
/// itself is not finite.
fn interior_limit(f: &ExprFn, d: f64, inward: f64, width: f64) -> Result<f64> {
    let v = f.eval(d);
    if v.is_finite() {
        return Ok(v);
    }
    let vals: Vec<f64> = (20..=44).map(|k| f.eval(d + inward * width * 0.5f64.powi(k))).collect();
    let last = vals[vals.len() - 1];
    let tail_ok = vals.iter().all(|v| v.is_finite())
        && vals.windows(2).rev().take(6).all(|w| (w[1] - w[0]).abs() <= 1e-9 * (1.0 + last.abs()));
    if tail_ok {
        Ok(last)
    } else {
        Err(Error::DivergentLimit { endpoint: d })
    }
}

pub fn boundary_transform(problem: &SLProblem, k: &KTransform, side: Side) -> Result<BoundaryTransform> {
    let (d, other, inward) = match side {
        Side::A => (problem.interval.a, problem.interval.b, 1.0),
        Side::B => (problem.interval.b, problem.interval.a, -1.0),
    };
    if !d.is_finite() {
        return Err(Error::DivergentLimit { endpoint: d });
    }
    let width = if other.is_finite() { (other - d).abs() } else { 1.0 };
    let a = interior_limit(&k.a, d, inward, width)?;
    let a_quasi = interior_limit(&k.a_quasi(problem), d, inward, width)?;
    let phi_prime = interior_limit(&k.phi_prime(), d, inward, width)?;
    Ok(BoundaryTransform::from_values(side, d, a, a_quasi, phi_prime))
}

/// Angle in [0, π).
pub fn canonical_angle(alpha: f64) -> f64 {
    let t = alpha.rem_euclid(PI);
    if t >= PI - 1e-15 {
        0.0
    } else {
        t
    }
}

pub fn same_angle(x: f64, y: f64, tol: f64) -> bool {
    (x - y).sin().abs() <= tol
}

/// Row vector ℓ with boundary condition ℓ·(g, g^{[1]}) = 0.
pub fn covector(angle: f64, side: Side) -> [f64; 2] {
    match side {
        Side::A => [angle.cos(), angle.sin()],
        Side::B => [angle.cos(), -angle.sin()],
    }
}

/// Robin parameter μ in f^{[1]}(d) = μ f(d); infinite for Dirichlet.
pub fn robin_parameter(angle: f64, side: Side) -> f64 {
    let a = canonical_angle(angle);
    if a == 0.0 {
        return f64::INFINITY;
    }
    if same_angle(a, std::f64::consts::FRAC_PI_2, EXACT_TOL) {
        return 0.0;
    }
    match side {
        Side::A => -1.0 / a.tan(),
        Side::B => 1.0 / a.tan(),
    }
}

pub fn angle_name(angle: f64) -> &'static str {
    if same_angle(angle, 0.0, EXACT_TOL) {
        "Dirichlet"
    } else if same_angle(angle, PI / 2.0, EXACT_TOL) {
        "Neumann"
    } else {
        "Robin"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeparatedTest {
    /// ℓ M_d parallel to ℓ.
    pub eigenvector_form: bool,
    /// α = 0, or sin α A^{[1]} ± (1 - φ') cos α A = 0.
    pub scalar_form: bool,
}

impl SeparatedTest {
    pub fn agree(&self) -> bool {
        self.eigenvector_form == self.scalar_form
    }
}

/// Both invariance tests for the separated condition with angle `angle`.
pub fn separated_invariance(m: &BoundaryTransform, angle: f64) -> SeparatedTest {
    let l = covector(angle, m.side);
    let lm = [l[0] * m.matrix[0][0] + l[1] * m.matrix[1][0], l[0] * m.matrix[0][1] + l[1] * m.matrix[1][1]];
    let cross = lm[0] * l[1] - lm[1] * l[0];
    let norm = lm[0].hypot(lm[1]);
    let eigenvector_form = cross.abs() <= EXACT_TOL * norm;

    let (s, c) = (canonical_angle(angle).sin(), canonical_angle(angle).cos());
    let sign = if m.side == Side::A { 1.0 } else { -1.0 };
    let scale = m.a_quasi.abs() + ((1.0 - m.phi_prime) * m.a).abs() + m.a.abs();
    let scalar = sign * s * m.a_quasi + (1.0 - m.phi_prime) * c * m.a;
    let scalar_form = same_angle(angle, 0.0, EXACT_TOL) || scalar.abs() <= EXACT_TOL * scale;
    SeparatedTest { eigenvector_form, scalar_form }
}

/// The separated conditions at one endpoint that K leaves invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantSet {
    DirichletOnly,
    Two { angle: f64 },
    All,
}

impl InvariantSet {
    pub fn contains(&self, angle: f64, tol: f64) -> bool {
        match self {
            InvariantSet::All => true,
            InvariantSet::DirichletOnly => same_angle(angle, 0.0, tol),
            InvariantSet::Two { angle: a } => same_angle(angle, 0.0, tol) || same_angle(angle, *a, tol),
        }
    }

    /// Listed angles, or `None` for the whole circle.
    pub fn angles(&self) -> Option<Vec<f64>> {
        match self {
            InvariantSet::All => None,
            InvariantSet::DirichletOnly => Some(vec![0.0]),
            InvariantSet::Two { angle } => Some(vec![0.0, *angle]),
        }
    }
}

pub fn separated_invariant_set(m: &BoundaryTransform) -> InvariantSet {
    let unit_slope = (1.0 - m.phi_prime).abs() <= EXACT_TOL;
    let flat = m.a_quasi.abs() <= EXACT_TOL * m.a.abs().max(1.0);
    match (unit_slope, flat) {
        (true, true) => InvariantSet::All,
        (true, false) => InvariantSet::DirichletOnly,
        _ => {
            let sign = if m.side == Side::A { -1.0 } else { 1.0 };
            let cot = sign * m.a_quasi / ((1.0 - m.phi_prime) * m.a);
            InvariantSet::Two { angle: canonical_angle(1f64.atan2(cot)) }
        }
    }
}

fn mul2(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[derive(Clone, Debug, Serialize)]
pub struct CoupledTest {
    /// M_b R = R M_a.
    pub intertwining: bool,
    pub residual: f64,
    /// The case systems displayed for general A, and for constant A when it applies.
    pub displayed_general: bool,
    pub displayed_constant: Option<bool>,
    /// Any displayed system disagrees with the intertwining test.
    pub disagreement: bool,
    /// Intertwining holds although A(a) ≠ A(b).
    pub necessity_violated: bool,
}

/// Invariance of (g(b), g^{[1]}(b)) = e^{iη} R (g(a), g^{[1]}(a)); η cancels.
pub fn coupled_invariance(ma: &BoundaryTransform, mb: &BoundaryTransform, r: &Mat2) -> Result<CoupledTest> {
    if (det2(r) - 1.0).abs() > EXACT_TOL {
        return Err(Error::Input(format!("det R = {} is not 1", det2(r))));
    }
    let left = mul2(&mb.matrix, r);
    let right = mul2(r, &ma.matrix);
    let scale = 1.0
        + left.iter().flatten().chain(right.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = left.iter().flatten().zip(right.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let intertwining = residual <= EXACT_TOL * scale;

    let tol = EXACT_TOL * scale;
    let zero = |v: f64| v.abs() <= tol;
    let same_a = zero(ma.a - mb.a);
    let (aa, a1a, a1b, pa, pb) = (ma.a, ma.a_quasi, mb.a_quasi, ma.phi_prime, mb.phi_prime);
    let first = same_a
        && zero(a1a)
        && zero(r[0][0] * a1b + r[1][0] * aa * (pb - 1.0))
        && zero(r[1][1] * aa * (pa - pb) - r[0][1] * a1b);
    let second = same_a
        && zero(r[0][1])
        && zero(pa - pb)
        && zero(r[0][0] * a1b + r[1][0] * aa * (pb - 1.0) - r[1][1] * a1a);
    let displayed_general = first || second;
    let displayed_constant = (zero(a1a) && zero(a1b) && same_a).then(|| {
        let (ua, ub) = (zero(pa - 1.0), zero(pb - 1.0));
        if ua && ub {
            true
        } else if zero(pa - pb) {
            zero(r[1][0])
        } else if ub {
            zero(r[1][1])
        } else {
            false
        }
    });
    let disagreement = displayed_general != intertwining || displayed_constant.is_some_and(|c| c != intertwining);
    Ok(CoupledTest {
        intertwining,
        residual,
        displayed_general,
        displayed_constant,
        disagreement,
        necessity_violated: intertwining && !same_a,
    })
}

/// Basis of the real 2×2 matrices R with M_b R = R M_a (no determinant
/// constraint), and whether some member has nonzero determinant.
#[derive(Clone, Debug, Serialize)]
pub struct CoupledFamily {
    pub basis: Vec<Mat2>,
    pub admits_sl2: bool,
}

pub fn coupled_family(ma: &BoundaryTransform, mb: &BoundaryTransform) -> CoupledFamily {
    // vec(M_b R - R M_a) = (I ⊗ M_b - M_aᵀ ⊗ I) vec(R), column-major vec.
    let mut op = DMatrix::<f64>::zeros(4, 4);
    for col in 0..4 {
        let mut r = [[0.0; 2]; 2];
        r[col % 2][col / 2] = 1.0;
        let diff = {
            let (l, rr) = (mul2(&mb.matrix, &r), mul2(&r, &ma.matrix));
            [l[0][0] - rr[0][0], l[1][0] - rr[1][0], l[0][1] - rr[0][1], l[1][1] - rr[1][1]]
        };
        for row in 0..4 {
            op[(row, col)] = diff[row];
        }
    }
    let basis: Vec<Mat2> = null_space(&op, 1e-10).into_iter().map(|v| [[v[0], v[2]], [v[1], v[3]]]).collect();
    // det is a quadratic form on the family; it vanishes identically iff it
    // vanishes on each basis element and on each pairwise sum.
    let mut admits_sl2 = false;
    for i in 0..basis.len() {
        if det2(&basis[i]).abs() > 1e-10 {
            admits_sl2 = true;
        }
        for j in i + 1..basis.len() {
            let s: Mat2 = [
                [basis[i][0][0] + basis[j][0][0], basis[i][0][1] + basis[j][0][1]],
                [basis[i][1][0] + basis[j][1][0], basis[i][1][1] + basis[j][1][1]],
            ];
            if det2(&s).abs() > 1e-10 {
                admits_sl2 = true;
            }
        }
    }
    CoupledFamily { basis, admits_sl2 }
}

/// Orthonormal basis of the null space of `m` (singular values ≤ tol·σ_max).
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    // Pad to square so the SVD exposes all right singular vectors.
    let rows = m.nrows().max(n);
    let mut sq = DMatrix::<f64>::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(sq, false, true);
    let vt = svd.v_t.expect("right vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = tol * smax.max(1.0);
    (0..n)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).iter().copied().collect())
        .collect()
}

/// ‖L M N‖ with N an orthonormal basis of null(L): zero exactly when the
/// linear boundary condition L·v = 0 is mapped into itself by M.
pub fn linear_bc_residual(l: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let basis = null_space(l, 1e-12);
    let mut worst: f64 = 0.0;
    let scale = l.norm() * m.norm();
    for v in basis {
        let v = nalgebra::DVector::from_vec(v);
        worst = worst.max((l * (m * v)).norm());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Angle of the boundary condition a solution satisfies at a regular end.
pub fn solution_angle(value: f64, quasi: f64, side: Side) -> f64 {
    match side {
        Side::A => canonical_angle((-value).atan2(quasi)),
        Side::B => canonical_angle(value.atan2(quasi)),
    }
}

/// |ℓ·(g, g^{[1]})| / ‖(g, g^{[1]})‖.
pub fn boundary_residual(angle: f64, side: Side, value: f64, quasi: f64) -> f64 {
    let l = covector(angle, side);
    (l[0] * value + l[1] * quasi).abs() / value.hypot(quasi).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedAngle {
    pub angle: f64,
    pub name: &'static str,
    /// μ with g^{[1]}(d) = μ g(d).
    pub robin: f64,
}

impl NamedAngle {
    pub fn new(angle: f64, side: Side) -> NamedAngle {
        NamedAngle { angle, name: angle_name(angle), robin: robin_parameter(angle, side) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointReport {
    pub class: EndpointClass,
    pub transform: Option<BoundaryTransform>,
    pub invariant: Option<InvariantSet>,
    pub invariant_angles: Option<Vec<NamedAngle>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KreinTag {
    pub side: Side,
    pub condition: NamedAngle,
    /// "kernel" when read off the kernel element, "invariant-set" when it is
    /// the non-Dirichlet invariant condition at the only regular end.
    pub via: &'static str,
    pub boundary_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub a: EndpointReport,
    pub b: EndpointReport,
    pub coupled: Option<CoupledFamily>,
    pub friedrichs: String,
    pub krein: Option<KreinTag>,
    pub kernel_dimension: Option<usize>,
}

fn endpoint_report(problem: &SLProblem, k: &KTransform, side: Side) -> Result<EndpointReport> {
    let class = classify_endpoint(problem, side)?;
    match class.kind {
        EndpointKind::LimitPoint => Ok(EndpointReport {
            class,
            transform: None,
            invariant: None,
            invariant_angles: None,
            note: Some("limit point: no boundary condition".into()),
        }),
        EndpointKind::LimitCircle => Ok(EndpointReport {
            class,
            transform: None,
            invariant: None,
            invariant_angles: None,
            note: Some("limit circle but not regular: not classified".into()),
        }),
        EndpointKind::Regular => {
            let m = boundary_transform(problem, k, side)?;
            let set = separated_invariant_set(&m);
            let angles = set.angles().map(|v| v.into_iter().map(|a| NamedAngle::new(a, side)).collect());
            Ok(EndpointReport { class, transform: Some(m), invariant: Some(set), invariant_angles: angles, note: None })
        }
    }
}

fn end_data(sol: &SolutionFn, side: Side) -> (f64, f64) {
    let i = match side {
        Side::A => 0,
        Side::B => sol.grid().len() - 1,
    };
    (sol.values()[i], sol.quasi_values()[i])
}

pub fn classify_invariant_extensions(problem: &SLProblem, k: &KTransform) -> Result<ExtensionReport> {
    let a = endpoint_report(problem, k, Side::A)?;
    let b = endpoint_report(problem, k, Side::B)?;
    let coupled = match (&a.transform, &b.transform) {
        (Some(ma), Some(mb)) => Some(coupled_family(ma, mb)),
        _ => None,
    };
    let friedrichs = match (a.transform.is_some(), b.transform.is_some()) {
        (true, true) => "Dirichlet at a and b",
        (true, false) => "Dirichlet at a",
        (false, true) => "Dirichlet at b",
        (false, false) => "no boundary condition",
    }
    .to_string();

    let mut krein = None;
    let mut kernel_dimension = None;
    let regular: Vec<&EndpointReport> = [&a, &b].into_iter().filter(|r| r.transform.is_some()).collect();
    let lp_other = |r: &EndpointReport| {
        let other = if r.class.side == Side::A { &b } else { &a };
        other.class.kind == EndpointKind::LimitPoint
    };
    if regular.len() == 1 && lp_other(regular[0]) {
        let r = regular[0];
        let side = r.class.side;
        let set = r.invariant.as_ref().expect("regular endpoint has a set");
        let basis = kernel_basis(problem)?;
        kernel_dimension = Some(basis.dimension);
        if basis.dimension == 1 {
            let (v, q) = end_data(basis.members()[0], side);
            let angle = solution_angle(v, q, side);
            if set.contains(angle, KERNEL_ANGLE_TOL) {
                let snapped = set
                    .angles()
                    .and_then(|list| list.into_iter().find(|&x| same_angle(x, angle, KERNEL_ANGLE_TOL)))
                    .unwrap_or(angle);
                krein = Some(KreinTag {
                    side,
                    condition: NamedAngle::new(snapped, side),
                    via: "kernel",
                    boundary_residual: Some(boundary_residual(snapped, side, v, q)),
                });
            }
        } else if let InvariantSet::Two { angle } = set {
            krein = Some(KreinTag {
                side,
                condition: NamedAngle::new(*angle, side),
                via: "invariant-set",
                boundary_residual: None,
            });
        }
    }
    Ok(ExtensionReport { a, b, coupled, friedrichs, krein, kernel_dimension })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use std::f64::consts::FRAC_PI_4;

    fn mt(side: Side, a: f64, a1: f64, dphi: f64) -> BoundaryTransform {
        BoundaryTransform::from_values(side, 0.0, a, a1, dphi)
    }

    #[test]
    fn boundary_transforms_of_gallery() {
        let (pb, k) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
        let m = boundary_transform(&pb, &k, Side::A).unwrap();
        let want = [[2.0, 0.0], [-1.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.matrix[i][j] - want[i][j]).abs() <= 1e-14, "{:?}", m.matrix);
            }
        }
        let (pb, k) = gallery::example_3_9(1.0, 1.0).build().unwrap();
        let m = boundary_transform(&pb, &k, Side::B).unwrap();
        let r2 = 2f64.sqrt();
        assert!((m.matrix[0][0] - r2).abs() < 1e-15 && m.matrix[1][0] == 0.0);
        assert!((m.matrix[1][1] - r2 / 2.0).abs() < 1e-15);
        let id = KTransform::identity(pb.interval);
        let m = boundary_transform(&pb, &id, Side::B).unwrap();
        assert_eq!(m.matrix, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn separated_examples() {
        let m0 = mt(Side::A, 2.0, -1.5, 0.25);
        assert!(separated_invariance(&m0, 0.0).eigenvector_form);
        let t = separated_invariance(&m0, FRAC_PI_4);
        assert!(t.eigenvector_form && t.scalar_form);
        assert_eq!(separated_invariant_set(&m0), InvariantSet::Two { angle: FRAC_PI_4 });
        let r2 = 2f64.sqrt();
        let m1 = mt(Side::B, r2, 0.0, 0.5);
        assert!(separated_invariance(&m1, PI / 2.0).eigenvector_form);
        let t = separated_invariance(&m1, PI / 3.0);
        assert!(!t.eigenvector_form && !t.scalar_form);
        assert_eq!(separated_invariant_set(&m1), InvariantSet::Two { angle: PI / 2.0 });
        assert_eq!(separated_invariant_set(&mt(Side::A, 1.0, 0.0, 1.0)), InvariantSet::All);
        assert_eq!(separated_invariant_set(&mt(Side::B, 1.0, 0.3, 1.0)), InvariantSet::DirichletOnly);
    }

    #[test]
    fn coupled_examples() {
        let half = mt(Side::A, 1.0, 0.0, 0.5);
        let half_b = mt(Side::B, 1.0, 0.0, 0.5);
        let t = coupled_invariance(&half, &half_b, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(t.intertwining && !t.disagreement);
        let t = coupled_invariance(&half, &half_b, &[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(!t.intertwining);
        // The constant-A display admits this R although intertwining does not.
        assert_eq!(t.displayed_constant, Some(true));
        assert!(t.disagreement);

        let one = mt(Side::A, 3.0, 0.0, 1.0);
        let one_b = mt(Side::B, 3.0, 0.0, 1.0);
        for r in [[[1.0, 0.0], [0.0, 1.0]], [[2.0, 3.0], [1.0, 2.0]], [[0.0, -1.0], [1.0, 0.0]]] {
            let t = coupled_invariance(&one, &one_b, &r).unwrap();
            assert!(t.intertwining && !t.disagreement);
        }
        assert!(coupled_invariance(&one, &one_b, &[[1.0, 1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn coupled_necessity_can_fail_with_reciprocal_weights() {
        // A(a) = 2, A(b) = 1/2, both with A²φ' = 1: a rotation intertwines.
        let ma = mt(Side::A, 2.0, 0.0, 0.25);
        let mb = mt(Side::B, 0.5, 0.0, 4.0);
        let t = coupled_invariance(&ma, &mb, &[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(t.intertwining && t.necessity_violated);
    }

    #[test]
    fn coupled_family_dimensions() {
        let half = mt(Side::A, 1.0, 0.0, 0.5);
        let f = coupled_family(&half, &mt(Side::B, 1.0, 0.0, 0.5));
        assert_eq!(f.basis.len(), 2);
        assert!(f.admits_sl2);
        let f = coupled_family(&half, &mt(Side::B, 1.0, 0.0, 1.0));
        assert!(!f.admits_sl2);
        let f = coupled_family(&mt(Side::A, 1.0, 0.0, 1.0), &mt(Side::B, 1.0, 0.0, 1.0));
        assert_eq!(f.basis.len(), 4);
    }

    #[test]
    fn block_conditions_of_example_3_14() {
        let (ac, ad) = (2f64.sqrt(), 2.0);
        let mc = [[ac, 0.0], [0.0, 1.0 / ac]];
        let md = [[ad, 0.0], [0.0, 1.0 / ad]];
        let mut m = DMatrix::<f64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, 2 + j)] = mc[i][j];
                m[(2 + i, j)] = md[i][j];
            }
        }
        for s in [1.0, -1.0] {
            let l = DMatrix::from_row_slice(2, 4, &[ad.sqrt(), 0.0, -s * ac.sqrt(), 0.0, 0.0, ac.sqrt(), 0.0, s * ad.sqrt()]);
            assert!(linear_bc_residual(&l, &m) <= 1e-14);
            let wrong = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, -s, 0.0, 0.0, 1.0, 0.0, s]);
            assert!(linear_bc_residual(&wrong, &m) > 1e-2);
        }
    }

    #[test]
    fn classification_of_gallery() {
        let (pb, k) = gallery::example_3_9(1.0, 3.0).build().unwrap();
        let rep = classify_invariant_extensions(&pb, &k).unwrap();
        assert_eq!(rep.a.class.kind, EndpointKind::LimitPoint);
        assert_eq!(rep.b.invariant, Some(InvariantSet::Two { angle: PI / 2.0 }));
        let names: Vec<&str> = rep.b.invariant_angles.as_ref().unwrap().iter().map(|a| a.name).collect();
        assert_eq!(names, ["Dirichlet", "Neumann"]);
        let krein = rep.krein.unwrap();
        assert_eq!(krein.condition.name, "Neumann");
        assert!(krein.boundary_residual.unwrap() <= 1e-8);

        let (pb, k) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
        let rep = classify_invariant_extensions(&pb, &k).unwrap();
        let InvariantSet::Two { angle } = rep.a.invariant.clone().unwrap() else { panic!() };
        assert!((angle - FRAC_PI_4).abs() <= 1e-12);
        let krein = rep.krein.unwrap();
        assert!((krein.condition.angle - FRAC_PI_4).abs() <= 1e-12 && krein.via == "kernel");

        let (pb, k) = gallery::example_2_8(2.0).build().unwrap();
        let rep = classify_invariant_extensions(&pb, &k).unwrap();
        let mus: Vec<f64> = rep.a.invariant_angles.unwrap().iter().map(|a| a.robin).collect();
        assert_eq!(mus, [f64::INFINITY, 0.0]);
        assert_eq!(rep.kernel_dimension, Some(0));
        assert_eq!(rep.krein.unwrap().condition.name, "Neumann");
    }
}
