//! Finite-dimensional laboratory for extensions parameterized by an
//! auxiliary operator B on a subspace of ker(S*).
//!
//! An extension is labelled by (D(B), B) and its domain is
//! `D(S) ∔ {S_F⁻¹Bf + f : f ∈ D(B)} ∔ {S_F⁻¹η : η ∈ D(B)^⊥ ∩ ker(S*)}`.
//! It is K-invariant exactly when K maps D(B) onto itself and the
//! compression of K*BK to D(B) equals B. On a finite-dimensional kernel all
//! of this reduces to small complex matrices in an orthonormal kernel basis,
//! which is what [`DefectModel`] provides.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use rayon::prelude::*;
use serde::Serialize;

pub use nalgebra::Complex;

use crate::funcalg::GridFn;
use crate::extensions::{boundary_transform, linear_bc_residual, null_space, Mat2};
use crate::ktransform::{KTransform, SLProblem};
use crate::problem::ProblemSpec;
use crate::slcore::{kernel_basis, Side, SolutionFn};
use crate::spectral::{boundary_data, discretize, BoundaryCondition, DiscreteExtension, Truncation};
use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Largest relative off-span part of K applied to the sampled kernel.
pub const OFF_SPAN_TOL: f64 = 1e-6;
/// Tolerance of the invariance condition ‖P K̃*BK̃ − B‖ and of the domain test.
pub const CONDITION_TOL: f64 = 1e-10;
/// Eigenvalues of K̃ closer than this (relative) share a root space.
pub const CLUSTER_GAP: f64 = 1e-8;
/// |ζ| is taken as 1 within this distance.
pub const UNIMODULAR_TOL: f64 = 1e-8;
/// Grid size used when a caller does not choose one.
pub const DEFAULT_INTERVALS: usize = 2000;

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Discrete model of ker(S*) and of K restricted to it.
#[derive(Clone, Debug)]
pub struct DefectModel {
    /// Dirichlet (Friedrichs) discretization of one copy of τ.
    pub friedrichs: DiscreteExtension,
    /// Number of copies of τ (1 scalar, 2 for a block operator).
    pub copies: usize,
    /// Orthonormal kernel basis; each vector stacks `copies` node vectors.
    pub kernel: Vec<Vec<f64>>,
    /// Matrix of K on the kernel span in the basis above.
    pub k_tilde: CMat,
    /// max_j ‖K e_j − Σ_i K̃_ij e_i‖ / ‖K e_j‖.
    pub off_span: f64,
}

impl DefectModel {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    fn nodes(&self) -> usize {
        self.friedrichs.nodes.len()
    }

    /// Discrete L²_r inner product of stacked vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let n = self.nodes();
        (0..self.copies).map(|k| self.friedrichs.inner(&f[k * n..(k + 1) * n], &g[k * n..(k + 1) * n])).sum()
    }

    /// S_F⁻¹ applied copy by copy.
    pub fn friedrichs_solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.nodes();
        let mut out = Vec::with_capacity(f.len());
        for k in 0..self.copies {
            out.extend(self.friedrichs.solve(&f[k * n..(k + 1) * n])?);
        }
        Ok(out)
    }

    /// Σ coeffs_i e_i as a complex stacked vector.
    pub fn kernel_vector(&self, coeffs: &[C64]) -> Vec<C64> {
        let len = self.copies * self.nodes();
        let mut out = vec![c(0.0); len];
        for (e, a) in self.kernel.iter().zip(coeffs) {
            for (o, v) in out.iter_mut().zip(e) {
                *o += *a * *v;
            }
        }
        out
    }

    /// Boundary value and quasi-derivative of each copy of a real stacked vector.
    pub fn boundary_data(&self, values: &[f64], side: Side) -> Vec<(f64, f64)> {
        let n = self.nodes();
        (0..self.copies).map(|k| boundary_data(&self.friedrichs, &values[k * n..(k + 1) * n], side)).collect()
    }

    /// Model from sampled kernel vectors and their images under K.
    fn assemble(friedrichs: DiscreteExtension, copies: usize, kernel: Vec<Vec<f64>>, images: Vec<Vec<f64>>) -> Result<Self> {
        let mut model = DefectModel { friedrichs, copies, kernel: Vec::new(), k_tilde: CMat::zeros(0, 0), off_span: 0.0 };
        // Gram-Schmidt, carrying the images along: e_j = Σ_k T_jk v_k.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut mapped: Vec<Vec<f64>> = Vec::new();
        for (v, kv) in kernel.into_iter().zip(images) {
            let (mut v, mut kv) = (v, kv);
            for (e, ke) in basis.iter().zip(&mapped) {
                let s = model.inner(e, &v);
                v.iter_mut().zip(e).for_each(|(x, y)| *x -= s * y);
                kv.iter_mut().zip(ke).for_each(|(x, y)| *x -= s * y);
            }
            let norm = model.inner(&v, &v).sqrt();
            if !(norm > 1e-12) {
                return Err(Error::Validation("sampled kernel vectors are linearly dependent".into()));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            kv.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            mapped.push(kv);
        }
        let m = basis.len();
        let mut k_tilde = CMat::zeros(m, m);
        let mut off_span: f64 = 0.0;
        for j in 0..m {
            let mut rest = mapped[j].clone();
            for i in 0..m {
                let s = model.inner(&basis[i], &mapped[j]);
                k_tilde[(i, j)] = c(s);
                rest.iter_mut().zip(&basis[i]).for_each(|(x, y)| *x -= s * y);
            }
            let total = model.inner(&mapped[j], &mapped[j]).sqrt();
            off_span = off_span.max(model.inner(&rest, &rest).sqrt() / total.max(f64::MIN_POSITIVE));
        }
        model.kernel = basis;
        model.k_tilde = k_tilde;
        model.off_span = off_span;
        if !(off_span <= OFF_SPAN_TOL) {
            return Err(Error::Validation(format!("K leaks out of the kernel span: off-span residual {off_span:e}")));
        }
        Ok(model)
    }
}

/// Kernel solution at x; next to a singular end, where re-integration can
/// stall, the stored solution is interpolated instead.
struct Sampler<'a> {
    sol: &'a SolutionFn,
    table: GridFn,
}

impl<'a> Sampler<'a> {
    fn new(sol: &'a SolutionFn) -> Result<Self> {
        Ok(Sampler { sol, table: GridFn::new(sol.grid().to_vec(), sol.values().to_vec())? })
    }

    fn at(&self, x: f64) -> f64 {
        let x = x.clamp(self.sol.lo(), self.sol.hi());
        self.sol.eval(x).map_or_else(|_| self.table.eval(x), |v| v.0)
    }
}

fn kernel_samples(problem: &SLProblem, k: &KTransform, nodes: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let basis = kernel_basis(problem)?;
    let mut kernel = Vec::new();
    let mut images = Vec::new();
    for sol in basis.members() {
        let s = Sampler::new(sol)?;
        kernel.push(nodes.iter().map(|&x| s.at(x)).collect());
        images.push(nodes.iter().map(|&x| k.a.eval(x) * s.at(k.phi.eval(x))).collect());
    }
    Ok((kernel, images))
}

/// Scalar model on `intervals` grid intervals.
pub fn build_scalar_model(problem: &SLProblem, k: &KTransform, intervals: usize) -> Result<DefectModel> {
    let dx = discretize(problem, BoundaryCondition::dirichlet(), intervals, Truncation::for_problem(problem))?;
    let (kernel, images) = kernel_samples(problem, k, &dx.nodes)?;
    DefectModel::assemble(dx, 1, kernel, images)
}

/// Model of the block operator diag(τ, τ) with 𝐊(f, g) = (K_c g, K_d f).
/// `factory(s)` returns the scalar problem with similarity parameter s.
pub fn build_block_model(
    c_param: f64,
    d_param: f64,
    factory: impl Fn(f64) -> ProblemSpec,
    intervals: usize,
) -> Result<DefectModel> {
    if !(c_param > 0.0 && d_param > 0.0) {
        return Err(Error::Input("block parameters must be positive".into()));
    }
    let (pc, kc) = factory(c_param).build()?;
    let (pd, kd) = factory(d_param).build()?;
    same_expression(&pc, &pd)?;
    let dx = discretize(&pc, BoundaryCondition::dirichlet(), intervals, Truncation::for_problem(&pc))?;
    let (scalar, _) = kernel_samples(&pc, &kc, &dx.nodes)?;
    if scalar.len() != 1 {
        return Err(Error::KernelDimension { found: scalar.len(), expected: 1 });
    }
    let basis = kernel_basis(&pc)?;
    let u = Sampler::new(basis.members()[0])?;
    let image = |k: &KTransform| -> Vec<f64> { dx.nodes.iter().map(|&x| k.a.eval(x) * u.at(k.phi.eval(x))).collect() };
    let (uc, ud) = (image(&kc), image(&kd));
    let zeros = vec![0.0; dx.nodes.len()];
    let stack = |f: &[f64], g: &[f64]| [f, g].concat();
    // 𝐊(u, 0) = (0, K_d u), 𝐊(0, u) = (K_c u, 0).
    let kernel = vec![stack(&scalar[0], &zeros), stack(&zeros, &scalar[0])];
    let images = vec![stack(&zeros, &ud), stack(&uc, &zeros)];
    DefectModel::assemble(dx, 2, kernel, images)
}

fn same_expression(a: &SLProblem, b: &SLProblem) -> Result<()> {
    let (lo, hi) = a.working_bounds()?;
    for t in [0.13, 0.37, 0.61, 0.89] {
        let x = lo + t * (hi - lo);
        for (f, g) in [(&a.p, &b.p), (&a.q, &b.q), (&a.r, &b.r)] {
            let (u, v) = (f.eval(x), g.eval(x));
            if (u - v).abs() > 1e-12 * (1.0 + u.abs()) {
                return Err(Error::Validation("block components do not share the differential expression".into()));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AuxKind {
    /// B Hermitian and nonnegative.
    Nonnegative,
    /// Im⟨f, Bf⟩ ≥ 0 but B not Hermitian.
    Dissipative,
}

/// D(B) (orthonormal columns in kernel coordinates) and B on it.
#[derive(Clone, Debug)]
pub struct AuxiliaryOperator {
    pub domain: CMat,
    pub b: CMat,
}

const AUX_TOL: f64 = 1e-12;

impl AuxiliaryOperator {
    /// D(B) = {0}.
    pub fn friedrichs(kernel_dim: usize) -> AuxiliaryOperator {
        AuxiliaryOperator { domain: CMat::zeros(kernel_dim, 0), b: CMat::zeros(0, 0) }
    }

    /// B = 0 on the whole kernel.
    pub fn krein(kernel_dim: usize) -> AuxiliaryOperator {
        AuxiliaryOperator::zero_on(CMat::identity(kernel_dim, kernel_dim))
    }

    /// B = 0 on the span of `domain`'s columns.
    pub fn zero_on(domain: CMat) -> AuxiliaryOperator {
        let q = orthonormal_columns(&domain);
        let m = q.ncols();
        AuxiliaryOperator { domain: q, b: CMat::zeros(m, m) }
    }

    /// B = b on a one-dimensional kernel.
    pub fn scalar(b: C64) -> AuxiliaryOperator {
        AuxiliaryOperator { domain: CMat::identity(1, 1), b: CMat::from_element(1, 1, b) }
    }

    /// Orthonormalizes `domain`; `b` must be given in the resulting basis, so
    /// pass a domain with orthonormal columns when b is nonzero.
    pub fn new(domain: CMat, b: CMat) -> Result<AuxiliaryOperator> {
        let q = orthonormal_columns(&domain);
        if q.ncols() != b.nrows() || b.nrows() != b.ncols() {
            return Err(Error::Input(format!("B is {}x{} on a {}-dimensional domain", b.nrows(), b.ncols(), q.ncols())));
        }
        let aux = AuxiliaryOperator { domain: q, b };
        aux.kind()?;
        Ok(aux)
    }

    pub fn dimension(&self) -> usize {
        self.domain.ncols()
    }

    /// Nonnegative self-adjoint or dissipative; anything else is an error.
    pub fn kind(&self) -> Result<AuxKind> {
        let b = &self.b;
        let scale = b.norm().max(1.0);
        let herm = (b - b.adjoint()).norm() <= AUX_TOL * scale;
        if herm {
            if min_hermitian_eigenvalue(&((b + b.adjoint()) * c(0.5))) >= -AUX_TOL * scale {
                return Ok(AuxKind::Nonnegative);
            }
            return Err(Error::Validation("B is self-adjoint but not nonnegative".into()));
        }
        // Im⟨f, Bf⟩ = ⟨f, (B − B*)/(2i) f⟩.
        let im = (b - b.adjoint()) * Complex::new(0.0, -0.5);
        if min_hermitian_eigenvalue(&im) >= -AUX_TOL * scale {
            Ok(AuxKind::Dissipative)
        } else {
            Err(Error::Validation("B is neither nonnegative nor dissipative".into()))
        }
    }
}

fn min_hermitian_eigenvalue(h: &CMat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(h.clone()).eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Orthonormal basis of the column span (rank cut at 1e-10 relative).
pub fn orthonormal_columns(m: &CMat) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * smax).collect();
    let mut q = CMat::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &u.column(i));
    }
    fix_phases(q)
}

/// Scales each column so its largest entry is real and positive.
fn fix_phases(mut q: CMat) -> CMat {
    for j in 0..q.ncols() {
        let mut best = c(0.0);
        for i in 0..q.nrows() {
            if q[(i, j)].norm() > best.norm() + 1e-12 {
                best = q[(i, j)];
            }
        }
        if best.norm() > 0.0 {
            let phase = best.conj() / best.norm();
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Null space of a complex matrix (singular values ≤ tol·max(1, σ_max)).
pub fn complex_null_space(m: &CMat, tol: f64) -> CMat {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut sq = CMat::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(sq, false, true);
    let vt = svd.v_t.expect("right vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol * smax.max(1.0)).collect();
    let mut q = CMat::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let row = vt.row(i);
        for k in 0..n {
            q[(k, j)] = row[k].conj();
        }
    }
    fix_phases(q)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InvarianceCheck {
    /// ‖K̃Q − Q(Q*K̃Q)‖ relative to ‖K̃‖.
    pub domain_residual: f64,
    /// ‖K̃_D* B K̃_D − B‖, K̃_D = Q*K̃Q.
    pub condition_residual: f64,
    pub pass: bool,
}

/// Whether the extension labelled by `aux` is K-invariant.
pub fn check_invariance_condition(aux: &AuxiliaryOperator, k_tilde: &CMat) -> InvarianceCheck {
    let q = &aux.domain;
    if q.ncols() == 0 {
        return InvarianceCheck { domain_residual: 0.0, condition_residual: 0.0, pass: true };
    }
    let kq = k_tilde * q;
    let kd = q.adjoint() * &kq;
    let domain_residual = (&kq - q * &kd).norm() / k_tilde.norm().max(1.0);
    if !(domain_residual <= CONDITION_TOL) {
        return InvarianceCheck { domain_residual, condition_residual: f64::NAN, pass: false };
    }
    let lhs = kd.adjoint() * &aux.b * &kd;
    let condition_residual = (&lhs - &aux.b).norm();
    let scale = (aux.b.norm() * kd.norm().powi(2)).max(1.0);
    InvarianceCheck { domain_residual, condition_residual, pass: condition_residual <= CONDITION_TOL * scale }
}

/// Generalized eigenspace of K̃ for one eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct RootSpace {
    pub zeta: C64,
    pub multiplicity: usize,
    /// Orthonormal basis of ker(K̃ − ζ)^multiplicity.
    pub basis: CMat,
    /// Orthonormal basis of ker(K̃ − ζ).
    pub eigenvectors: CMat,
}

impl RootSpace {
    pub fn unimodular(&self) -> bool {
        (self.zeta.norm() - 1.0).abs() <= UNIMODULAR_TOL
    }

    pub fn defective(&self) -> bool {
        self.eigenvectors.ncols() < self.basis.ncols()
    }
}

fn sort_key(z: &C64) -> (f64, f64) {
    (-z.re, -z.im)
}

/// Eigenvalues of K̃ clustered at relative gap [`CLUSTER_GAP`], with their
/// root spaces, plus warnings about near-degenerate clusters.
pub fn root_decomposition(k_tilde: &CMat) -> Result<(Vec<RootSpace>, Vec<String>)> {
    let n = k_tilde.nrows();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let schur = nalgebra::Schur::new(k_tilde.clone());
    let (_, t) = schur.unpack();
    let mut zetas: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    zetas.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).unwrap_or(std::cmp::Ordering::Equal));
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in zetas {
        match clusters.iter_mut().find(|cl| (cl[0] - z).norm() <= CLUSTER_GAP * cl[0].norm().max(1.0)) {
            Some(cl) => cl.push(z),
            None => clusters.push(vec![z]),
        }
    }
    let mut warnings = Vec::new();
    let mut spaces = Vec::new();
    let id = CMat::identity(n, n);
    for cl in clusters {
        let m = cl.len();
        let zeta = cl.iter().sum::<C64>() / c(m as f64);
        let spread = cl.iter().map(|z| (z - zeta).norm()).fold(0.0, f64::max);
        let shifted = k_tilde - &id * zeta;
        let mut power = shifted.clone();
        for _ in 1..m {
            power = &power * &shifted;
        }
        let scale = k_tilde.norm().max(1.0);
        let basis = if m == n { id.clone() } else { complex_null_space(&power, 1e-8 * scale.powi(m as i32)) };
        let eigenvectors = complex_null_space(&shifted, 1e-7);
        let eigenvectors = if eigenvectors.ncols() == 0 { complex_null_space(&shifted, 1e-4) } else { eigenvectors };
        if m > 1 && eigenvectors.ncols() < m {
            warnings.push(format!(
                "defective eigenvalue {:.6e}{:+.6e}i (multiplicity {m}, {} eigenvectors, cluster spread {spread:.1e}): invariant subspaces are limited to those generated by root spaces",
                zeta.re,
                zeta.im,
                eigenvectors.ncols()
            ));
        }
        if m > 1 && spread > 0.0 {
            warnings.push(format!("eigenvalues within relative gap {CLUSTER_GAP:e} were merged (spread {spread:.1e})"));
        }
        if basis.ncols() != m {
            return Err(Error::Solve(format!("root space of dimension {} for multiplicity {m}", basis.ncols())));
        }
        spaces.push(RootSpace { zeta, multiplicity: m, basis, eigenvectors });
    }
    Ok((spaces, warnings))
}

#[derive(Clone, Debug)]
pub struct EnumeratedExtension {
    pub label: String,
    pub aux: AuxiliaryOperator,
    /// Eigenvalues of K̃ on D(B).
    pub zetas: Vec<C64>,
    pub check: InvarianceCheck,
}

/// Nonzero B on a K̃-invariant subspace satisfying the invariance condition.
#[derive(Clone, Debug)]
pub struct NonzeroFamily {
    pub label: String,
    pub domain: CMat,
    /// Real dimension of the space of Hermitian solutions of K̃_D*BK̃_D = B.
    pub solution_dimension: usize,
    /// Also admits dissipative (non-Hermitian) B (one-dimensional domains).
    pub dissipative: bool,
    /// A nonzero nonnegative member, re-verified.
    pub representative: AuxiliaryOperator,
    pub check: InvarianceCheck,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub root_spaces: Vec<RootSpace>,
    /// B = 0 on each root-space generated invariant subspace, D(B) = {0} first.
    pub extensions: Vec<EnumeratedExtension>,
    pub families: Vec<NonzeroFamily>,
    /// Some root space has a scalar restriction of dimension ≥ 2, so every
    /// subspace of it is invariant and the list above is a parameterization.
    pub infinite: bool,
    pub warnings: Vec<String>,
}

impl Enumeration {
    pub fn labels(&self) -> Vec<&str> {
        self.extensions.iter().map(|e| e.label.as_str()).collect()
    }
}

fn zeta_text(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:.12e}", z.re)
    } else {
        format!("{:.12e}{:+.12e}i", z.re, z.im)
    }
}

fn hstack(parts: &[&CMat], rows: usize) -> CMat {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut j = 0;
    for p in parts {
        out.view_mut((0, j), (rows, p.ncols())).copy_from(p);
        j += p.ncols();
    }
    out
}

/// Real basis of the Hermitian solutions of K_D* H K_D = H.
fn hermitian_solutions(kd: &CMat) -> Vec<CMat> {
    let m = kd.nrows();
    let mut basis: Vec<CMat> = Vec::new();
    for i in 0..m {
        let mut e = CMat::zeros(m, m);
        e[(i, i)] = c(1.0);
        basis.push(e);
        for j in i + 1..m {
            let mut s = CMat::zeros(m, m);
            s[(i, j)] = c(1.0);
            s[(j, i)] = c(1.0);
            basis.push(s);
            let mut a = CMat::zeros(m, m);
            a[(i, j)] = Complex::new(0.0, 1.0);
            a[(j, i)] = Complex::new(0.0, -1.0);
            basis.push(a);
        }
    }
    let mut lin = DMatrix::<f64>::zeros(2 * m * m, basis.len());
    for (k, h) in basis.iter().enumerate() {
        let img = kd.adjoint() * h * kd - h;
        for (idx, v) in img.iter().enumerate() {
            lin[(2 * idx, k)] = v.re;
            lin[(2 * idx + 1, k)] = v.im;
        }
    }
    null_space(&lin, 1e-10)
        .into_iter()
        .map(|w| basis.iter().zip(&w).fold(CMat::zeros(m, m), |acc, (h, &t)| acc + h * c(t)))
        .collect()
}

fn nonnegative_member(solutions: &[CMat]) -> Option<CMat> {
    let mut tries: Vec<CMat> = Vec::new();
    for (i, h) in solutions.iter().enumerate() {
        tries.push(h.clone());
        tries.push(-h.clone());
        for g in &solutions[i + 1..] {
            for s in [1.0, -1.0] {
                tries.push(h + g * c(s));
                tries.push(-h + g * c(s));
            }
        }
    }
    tries.into_iter().find(|h| h.norm() > 1e-8 && min_hermitian_eigenvalue(h) >= -1e-12 * h.norm())
}

/// Invariant extensions whose D(B) is generated by root spaces of K̃:
/// B = 0 on every such subspace, and the nonzero nonnegative B families
/// that survive the invariance condition (only possible where |ζ| = 1).
pub fn enumerate_invariant_extensions(k_tilde: &CMat) -> Result<Enumeration> {
    let n = k_tilde.nrows();
    if n > 2 {
        return Err(Error::Input(format!("kernel dimension {n} exceeds 2")));
    }
    let (roots, mut warnings) = root_decomposition(k_tilde)?;
    let mut subspaces: Vec<(String, CMat)> = vec![("friedrichs".into(), CMat::zeros(n, 0))];
    let mut infinite = false;
    if roots.len() > 1 {
        for r in &roots {
            subspaces.push((format!("zero-on-root(zeta={})", zeta_text(r.zeta)), r.basis.clone()));
        }
    }
    for r in &roots {
        if r.defective() {
            subspaces.push((format!("zero-on-eigenspace(zeta={})", zeta_text(r.zeta)), r.eigenvectors.clone()));
        } else if r.multiplicity > 1 {
            infinite = true;
            warnings.push(format!(
                "K restricted to the root space of {} is scalar: every subspace of it is invariant",
                zeta_text(r.zeta)
            ));
        }
    }
    if n > 0 {
        let all: Vec<&CMat> = roots.iter().map(|r| &r.basis).collect();
        subspaces.push(("krein".into(), hstack(&all, n)));
    }

    let extensions: Vec<EnumeratedExtension> = subspaces
        .par_iter()
        .map(|(label, dom)| {
            let aux = AuxiliaryOperator::zero_on(dom.clone());
            let kd = aux.domain.adjoint() * k_tilde * &aux.domain;
            let zetas = if kd.nrows() == 0 { Vec::new() } else { kd.clone().eigenvalues().map_or_else(Vec::new, |v| v.iter().copied().collect()) };
            let check = check_invariance_condition(&aux, k_tilde);
            EnumeratedExtension { label: label.clone(), aux, zetas, check }
        })
        .collect();
    if let Some(bad) = extensions.iter().find(|e| !e.check.pass) {
        return Err(Error::Validation(format!("candidate {} failed re-verification", bad.label)));
    }

    let families: Vec<NonzeroFamily> = subspaces
        .par_iter()
        .filter(|(_, dom)| dom.ncols() > 0)
        .filter_map(|(label, dom)| {
            let q = orthonormal_columns(dom);
            let kd = q.adjoint() * k_tilde * &q;
            let sols = hermitian_solutions(&kd);
            let b = nonnegative_member(&sols)?;
            let representative = AuxiliaryOperator { domain: q.clone(), b };
            let check = check_invariance_condition(&representative, k_tilde);
            Some(NonzeroFamily {
                label: label.replacen("zero-on", "nonzero-on", 1).replace("krein", "nonzero-on-kernel"),
                domain: q,
                solution_dimension: sols.len(),
                dissipative: kd.nrows() == 1,
                representative,
                check,
            })
        })
        .collect();
    Ok(Enumeration { root_spaces: roots, extensions, families, infinite, warnings })
}

/// S_F⁻¹Bf + f + S_F⁻¹η on the grid; `f` and `eta` in kernel coordinates.
pub fn bkvg_domain_vector(model: &DefectModel, aux: &AuxiliaryOperator, f: &[C64], eta: &[C64]) -> Result<Vec<C64>> {
    let k = model.dimension();
    if f.len() != k || eta.len() != k {
        return Err(Error::Input(format!("coefficient vectors must have length {k}")));
    }
    let fv = nalgebra::DVector::from_column_slice(f);
    let ev = nalgebra::DVector::from_column_slice(eta);
    let q = &aux.domain;
    let coords = q.adjoint() * &fv;
    if (&fv - q * &coords).norm() > 1e-10 * fv.norm().max(1.0) {
        return Err(Error::Validation("f is not in D(B)".into()));
    }
    if (q.adjoint() * &ev).norm() > 1e-10 * ev.norm().max(1.0) {
        return Err(Error::Validation("eta is not orthogonal to D(B)".into()));
    }
    let source = q * (&aux.b * coords) + ev;
    let grid_source = model.kernel_vector(source.as_slice());
    let re: Vec<f64> = grid_source.iter().map(|z| z.re).collect();
    let im: Vec<f64> = grid_source.iter().map(|z| z.im).collect();
    let (sre, sim) = (model.friedrichs_solve(&re)?, model.friedrichs_solve(&im)?);
    let base = model.kernel_vector(f);
    Ok(base.iter().zip(sre.iter().zip(&sim)).map(|(b, (r, i))| b + Complex::new(*r, *i)).collect())
}

/// Boundary transform of 𝐊(f, g) = (K_c g, K_d f) on (f, f^{[1]}, g, g^{[1]}) at `side`.
pub fn block_boundary_transform(problem: &SLProblem, kc: &KTransform, kd: &KTransform, side: Side) -> Result<DMatrix<f64>> {
    let mc: Mat2 = boundary_transform(problem, kc, side)?.matrix;
    let md: Mat2 = boundary_transform(problem, kd, side)?.matrix;
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, 2 + j)] = mc[i][j];
            m[(2 + i, j)] = md[i][j];
        }
    }
    Ok(m)
}

/// Rows of the boundary condition L (f, f^{[1]}, g, g^{[1]}) = 0 with
/// √A_d f = ±√A_c g and √A_c f^{[1]} = ∓√A_d g^{[1]}.
pub fn block_condition_display(a_c: f64, a_d: f64, sign: f64) -> DMatrix<f64> {
    let (sc, sd) = (a_c.sqrt(), a_d.sqrt());
    DMatrix::from_row_slice(2, 4, &[sd, 0.0, -sign * sc, 0.0, 0.0, sc, 0.0, sign * sd])
}

/// Boundary condition at `side` realized by an extension of a block model:
/// the annihilator of the boundary data of f + S_F⁻¹η over a basis of D(B)
/// and of its complement in the kernel (B = 0 only).
pub fn block_condition_from_domain(model: &DefectModel, aux: &AuxiliaryOperator, side: Side) -> Result<DMatrix<f64>> {
    if model.copies != 2 {
        return Err(Error::Input("boundary conditions of this form need a block model".into()));
    }
    let k = model.dimension();
    let q = &aux.domain;
    let comp = complex_null_space(&q.adjoint(), 1e-10);
    let zero = vec![c(0.0); k];
    let mut columns: Vec<[f64; 4]> = Vec::new();
    let mut push = |v: Vec<C64>| {
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let d = model.boundary_data(&re, side);
        columns.push([d[0].0, d[0].1, d[1].0, d[1].1]);
    };
    for j in 0..q.ncols() {
        let f: Vec<C64> = q.column(j).iter().copied().collect();
        push(bkvg_domain_vector(model, aux, &f, &zero)?);
    }
    for j in 0..comp.ncols() {
        let eta: Vec<C64> = comp.column(j).iter().copied().collect();
        push(bkvg_domain_vector(model, aux, &zero, &eta)?);
    }
    let mut data = DMatrix::zeros(columns.len(), 4);
    for (i, col) in columns.iter().enumerate() {
        for j in 0..4 {
            data[(i, j)] = col[j];
        }
    }
    let rows: Vec<Vec<f64>> = null_space(&data, 1e-9);
    let mut l = DMatrix::zeros(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..4 {
            l[(i, j)] = r[j];
        }
    }
    Ok(l)
}

/// Largest distance of a row of `want` (normalized) from the row space of `got`.
pub fn row_space_distance(want: &DMatrix<f64>, got: &DMatrix<f64>) -> f64 {
    let rows: Vec<nalgebra::DVector<f64>> = (0..got.nrows()).map(|i| got.row(i).transpose()).collect();
    let basis = nalgebra::DMatrix::from_columns(&rows);
    let q = basis.qr().q();
    let mut worst: f64 = 0.0;
    for i in 0..want.nrows() {
        let w = want.row(i).transpose();
        let w = &w / w.norm();
        let proj = &q * (q.transpose() * &w);
        worst = worst.max((w - proj).norm());
    }
    worst
}

/// Invariance residual of a block boundary condition under the block transform.
pub fn block_condition_residual(l: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    linear_bc_residual(l, m)
}

#[cfg(test)]
mod tests;
