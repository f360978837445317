use super::*;
use crate::extensions::{classify_invariant_extensions, same_angle, solution_angle};
use crate::gallery;

fn scalar(z: C64) -> CMat {
    CMat::from_element(1, 1, z)
}

fn model_3_9() -> DefectModel {
    let (pb, k) = gallery::example_3_9(1.0, 3.0).build().unwrap();
    build_scalar_model(&pb, &k, DEFAULT_INTERVALS).unwrap()
}

fn block_1_3() -> DefectModel {
    build_block_model(1.0, 3.0, |s| gallery::example_3_9(1.0, s), DEFAULT_INTERVALS).unwrap()
}

fn dichotomy_values() -> [C64; 5] {
    [c(0.0), c(0.5), c(1.0), Complex::new(0.0, 1.0), Complex::new(1.0, 1.0)]
}

#[test]
fn defect_one_with_expanding_eigenvalue() {
    let m = model_3_9();
    assert_eq!(m.dimension(), 1);
    assert!((m.k_tilde[(0, 0)] - c(2.0)).norm() <= 1e-10, "{}", m.k_tilde);
    assert!(m.off_span <= OFF_SPAN_TOL);
    assert!(check_invariance_condition(&AuxiliaryOperator::scalar(c(0.0)), &m.k_tilde).pass);
    assert!(!check_invariance_condition(&AuxiliaryOperator::scalar(c(0.5)), &m.k_tilde).pass);
    let e = enumerate_invariant_extensions(&m.k_tilde).unwrap();
    assert_eq!(e.labels(), ["friedrichs", "krein"]);
    assert!(e.families.is_empty() && !e.infinite);
}

#[test]
fn defect_one_dichotomy() {
    let expanding = scalar(c(2.0));
    let rotation = scalar(Complex::from_polar(1.0, 0.7));
    for b in dichotomy_values() {
        let aux = AuxiliaryOperator::scalar(b);
        assert!(aux.kind().is_ok());
        assert_eq!(check_invariance_condition(&aux, &expanding).pass, b == c(0.0), "b = {b}");
        assert!(check_invariance_condition(&aux, &rotation).pass, "b = {b}");
    }
    let e = enumerate_invariant_extensions(&rotation).unwrap();
    assert_eq!(e.families.len(), 1);
    assert!(e.families[0].dissipative && e.families[0].check.pass);
}

#[test]
fn auxiliary_kinds() {
    assert_eq!(AuxiliaryOperator::scalar(Complex::new(1.0, 2.0)).kind().unwrap(), AuxKind::Dissipative);
    assert!(AuxiliaryOperator::scalar(Complex::new(1.0, -2.0)).kind().is_err());
    assert!(AuxiliaryOperator::scalar(c(-1.0)).kind().is_err());
    assert_eq!(AuxiliaryOperator::krein(2).kind().unwrap(), AuxKind::Nonnegative);
}

#[test]
fn block_model_of_two_similarities() {
    let m = block_1_3();
    let r2 = 2f64.sqrt();
    let want = CMat::from_row_slice(2, 2, &[c(0.0), c(r2), c(2.0), c(0.0)]);
    assert!((&m.k_tilde - &want).norm() <= 1e-8, "{}", m.k_tilde);
    let e = enumerate_invariant_extensions(&m.k_tilde).unwrap();
    assert_eq!(e.extensions.len(), 4, "{:?}", e.labels());
    assert!(e.families.is_empty());
    let lam = 2f64.powf(0.75);
    let zetas: Vec<C64> = e.root_spaces.iter().map(|r| r.zeta).collect();
    assert!((zetas[0] - c(lam)).norm() <= 1e-8 && (zetas[1] - c(-lam)).norm() <= 1e-8);
    // v± = (√A_c, ±√A_d) normalized, A_c = √2, A_d = 2.
    for (r, s) in e.root_spaces.iter().zip([1.0, -1.0]) {
        let v = [r2.sqrt(), s * r2];
        let n = v[0].hypot(v[1]);
        let got = &r.eigenvectors;
        let phase = got[(0, 0)].conj() / got[(0, 0)].norm();
        let err = (got[(0, 0)] * phase - c(v[0] / n)).norm() + (got[(1, 0)] * phase - c(v[1] / n)).norm();
        assert!(err <= 1e-8, "{got}");
    }
}

#[test]
fn block_model_symmetric_case() {
    let m = build_block_model(2.0, 2.0, |s| gallery::example_3_9(1.0, s), 400).unwrap();
    let (roots, _) = root_decomposition(&m.k_tilde).unwrap();
    let a = 3f64.sqrt();
    assert!((roots[0].zeta - c(a)).norm() <= 1e-10 && (roots[1].zeta - c(-a)).norm() <= 1e-10);
    let h = 0.5f64.sqrt();
    assert!((roots[0].eigenvectors[(0, 0)] - c(h)).norm() <= 1e-10);
    assert!((roots[1].eigenvectors[(1, 0)] + c(h)).norm() <= 1e-10);
}

#[test]
fn block_boundary_conditions_from_domains() {
    let m = block_1_3();
    let e = enumerate_invariant_extensions(&m.k_tilde).unwrap();
    let (pb, kc) = gallery::example_3_9(1.0, 1.0).build().unwrap();
    let (_, kd) = gallery::example_3_9(1.0, 3.0).build().unwrap();
    let big = block_boundary_transform(&pb, &kc, &kd, Side::B).unwrap();
    let (a_c, a_d) = (2f64.sqrt(), 2.0);
    for (ext, sign) in e.extensions[1..3].iter().zip([1.0, -1.0]) {
        let got = block_condition_from_domain(&m, &ext.aux, Side::B).unwrap();
        let want = block_condition_display(a_c, a_d, sign);
        assert!(row_space_distance(&want, &got) <= 1e-8, "{}: {got}", ext.label);
        assert!(block_condition_residual(&want, &big) <= 1e-12);
    }
    // Friedrichs: f(1) = g(1) = 0; Krein: f'(1) = g'(1) = 0.
    let dirichlet = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let neumann = DMatrix::from_row_slice(2, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let f = block_condition_from_domain(&m, &e.extensions[0].aux, Side::B).unwrap();
    let k = block_condition_from_domain(&m, &e.extensions[3].aux, Side::B).unwrap();
    assert!(row_space_distance(&dirichlet, &f) <= 1e-8);
    assert!(row_space_distance(&neumann, &k) <= 1e-8);
    // A non-invariant mixture fails the block check.
    let wrong = block_condition_display(a_d, a_c, 1.0);
    assert!(block_condition_residual(&wrong, &big) > 1e-3);
}

#[test]
fn scalar_kernel_gives_infinite_family() {
    let e = enumerate_invariant_extensions(&CMat::identity(2, 2)).unwrap();
    assert!(e.infinite);
    assert_eq!(e.labels(), ["friedrichs", "krein"]);
    assert_eq!(e.families.len(), 1);
    assert_eq!(e.families[0].solution_dimension, 4);
    let b = CMat::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(3.0)]);
    let aux = AuxiliaryOperator::new(CMat::identity(2, 2), b).unwrap();
    assert!(check_invariance_condition(&aux, &CMat::identity(2, 2)).pass);
}

#[test]
fn defective_kernel_map() {
    let j = CMat::from_row_slice(2, 2, &[c(2.0), c(1.0), c(0.0), c(2.0)]);
    let e = enumerate_invariant_extensions(&j).unwrap();
    assert_eq!(e.extensions.len(), 3, "{:?}", e.labels());
    assert!(!e.warnings.is_empty());
    // The eigenline is span{e1}; the other coordinate line is not invariant.
    let line = CMat::from_column_slice(2, 1, &[c(0.0), c(1.0)]);
    assert!(!check_invariance_condition(&AuxiliaryOperator::zero_on(line), &j).pass);
}

#[test]
fn domain_vectors() {
    let m = model_3_9();
    let one = [c(1.0)];
    let zero = [c(0.0)];
    let krein = AuxiliaryOperator::krein(1);
    let v = bkvg_domain_vector(&m, &krein, &one, &zero).unwrap();
    assert!(v.iter().zip(&m.kernel[0]).all(|(a, b)| (a - c(*b)).norm() == 0.0));
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let (_, quasi) = m.boundary_data(&re, Side::B)[0];
    assert!(quasi.abs() <= 1e-4, "{quasi}");

    let fried = AuxiliaryOperator::friedrichs(1);
    let w = bkvg_domain_vector(&m, &fried, &zero, &one).unwrap();
    assert!(w[0].norm() <= 1e-6 && w[w.len() - 1].norm() <= 1e-6);
    assert!(bkvg_domain_vector(&m, &fried, &one, &zero).is_err());
    assert!(bkvg_domain_vector(&m, &krein, &one, &one).is_err());
}

#[test]
fn powers_of_k_give_same_outcomes() {
    let m = block_1_3();
    let k2 = &m.k_tilde * &m.k_tilde;
    for ext in enumerate_invariant_extensions(&m.k_tilde).unwrap().extensions {
        assert!(check_invariance_condition(&ext.aux, &k2).pass, "{}", ext.label);
    }
    let d = model_3_9();
    let k2 = &d.k_tilde * &d.k_tilde;
    for b in dichotomy_values() {
        let aux = AuxiliaryOperator::scalar(b);
        assert_eq!(check_invariance_condition(&aux, &d.k_tilde).pass, check_invariance_condition(&aux, &k2).pass);
    }
}

/// Scalar gallery models agree with the boundary-condition classification:
/// two extensions, tagged Dirichlet and the Krein angle.
#[test]
fn agrees_with_boundary_classification() {
    let mut seen = 0;
    for entry in gallery::list().unwrap() {
        if entry.id == "example_3_14" {
            continue;
        }
        let (pb, k) = entry.spec.build().unwrap();
        let report = classify_invariant_extensions(&pb, &k).unwrap();
        let Some(tag) = report.krein.as_ref().filter(|t| t.via == "kernel") else { continue };
        let m = build_scalar_model(&pb, &k, DEFAULT_INTERVALS).unwrap();
        let e = enumerate_invariant_extensions(&m.k_tilde).unwrap();
        assert_eq!(e.labels(), ["friedrichs", "krein"], "{}", entry.id);
        let zero = [c(0.0)];
        let one = [c(1.0)];
        let f = bkvg_domain_vector(&m, &e.extensions[0].aux, &zero, &one).unwrap();
        let k_vec = bkvg_domain_vector(&m, &e.extensions[1].aux, &one, &zero).unwrap();
        let side = tag.side;
        let angle_of = |v: &[C64]| {
            let re: Vec<f64> = v.iter().map(|z| z.re).collect();
            let (val, q) = m.boundary_data(&re, side)[0];
            solution_angle(val, q, side)
        };
        assert!(same_angle(angle_of(&f), 0.0, 1e-9), "{}", entry.id);
        let end = if side == Side::A { pb.interval.a } else { pb.interval.b };
        let krein_angle = if pb.p.eval(end).is_finite() {
            angle_of(&k_vec)
        } else {
            // p blows up at the end: a grid quasi-derivative is meaningless,
            // and the Krein vector is the kernel element itself.
            let basis = kernel_basis(&pb).unwrap();
            let u = basis.members()[0];
            let i = if side == Side::A { 0 } else { u.grid().len() - 1 };
            solution_angle(u.values()[i], u.quasi_values()[i], side)
        };
        assert!(same_angle(krein_angle, tag.condition.angle, 1e-3), "{}: {krein_angle} vs {}", entry.id, tag.condition.angle);
        seen += 1;
    }
    assert!(seen >= 3, "{seen}");
}
