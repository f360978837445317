use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use super::*;
use crate::funcalg::{ExprFn, Interval, Params};
use crate::gallery;

fn flat(q: &str) -> SLProblem {
    let dom = Interval::new(0.0, 1.0).unwrap();
    let e = |s: &str| ExprFn::parse(s, &Params::new(), dom).unwrap();
    SLProblem::new(e("1"), e(q), e("1"), dom)
}

fn trunc() -> Truncation {
    Truncation { eps: DEFAULT_EPS, length: 20.0 }
}

fn neumann() -> EndCondition {
    EndCondition::Angle(FRAC_PI_2)
}

#[test]
fn dirichlet_laplacian() {
    let dx = discretize(&flat("0"), BoundaryCondition::dirichlet(), 1000, trunc()).unwrap();
    let l = eigen_smallest(&dx, 1).unwrap()[0].value;
    assert!((l / (PI * PI) - 1.0).abs() <= 1e-3, "{l}");
    let dx = discretize(&flat("0"), BoundaryCondition::dirichlet(), 2000, trunc()).unwrap();
    let pairs = eigen_smallest(&dx, 3).unwrap();
    for (k, p) in pairs.iter().enumerate() {
        let want = ((k + 1) as f64 * PI).powi(2);
        assert!((p.value / want - 1.0).abs() <= 5e-3, "{k}: {}", p.value);
        assert!(p.residual <= 1e-10 * (1.0 + p.value), "{}", p.residual);
    }
}

#[test]
fn neumann_constant_mode() {
    let bc = BoundaryCondition::separated(neumann(), neumann());
    let dx = discretize(&flat("0"), bc, 1000, trunc()).unwrap();
    let p = &eigen_smallest(&dx, 1).unwrap()[0];
    assert!(p.value.abs() <= 1e-8, "{}", p.value);
    let v0 = p.vector[0];
    assert!(p.vector.iter().all(|v| (v - v0).abs() <= 1e-8 * v0.abs()));
}

#[test]
fn potential_shift_moves_every_eigenvalue() {
    let bc = BoundaryCondition::separated(EndCondition::Angle(0.4), neumann());
    let base = eigen_smallest(&discretize(&flat("x"), bc, 500, trunc()).unwrap(), 5).unwrap();
    let shifted = eigen_smallest(&discretize(&flat("x+1"), bc, 500, trunc()).unwrap(), 5).unwrap();
    for (a, b) in base.iter().zip(&shifted) {
        assert!((b.value - a.value - 1.0).abs() <= 1e-10, "{} {}", a.value, b.value);
    }
}

#[test]
fn periodic_condition_is_supported() {
    // R = I on (0, 1): periodic, eigenvalues 0, (2π)², (2π)², ...
    let bc = BoundaryCondition::Coupled { r: [[1.0, 0.0], [0.0, 1.0]] };
    let pairs = eigen_smallest(&discretize(&flat("0"), bc, 2000, trunc()).unwrap(), 3).unwrap();
    assert!(pairs[0].value.abs() <= 1e-8);
    for p in &pairs[1..] {
        assert!((p.value / (4.0 * PI * PI) - 1.0).abs() <= 1e-4, "{}", p.value);
    }
    // Antiperiodic through R = -I, and a genuinely bordered R12 ≠ 0 case
    // checked against a dense solve of the same pencil.
    let bc = BoundaryCondition::Coupled { r: [[-1.0, 0.0], [0.0, -1.0]] };
    let l = eigen_smallest(&discretize(&flat("0"), bc, 2000, trunc()).unwrap(), 1).unwrap()[0].value;
    assert!((l / (PI * PI) - 1.0).abs() <= 1e-4, "{l}");
    let bc = BoundaryCondition::Coupled { r: [[2.0, 0.5], [1.0, 0.75]] };
    let dx = discretize(&flat("1"), bc, 60, trunc()).unwrap();
    let n = dx.unknowns();
    let a = dx.standardized();
    let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for (j, v) in a.mul(&e).into_iter().enumerate() {
            dense[(j, i)] = v;
        }
    }
    let mut want: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
    want.sort_by(f64::total_cmp);
    let got = eigen_smallest(&dx, 4).unwrap();
    for (g, w) in got.iter().zip(&want) {
        assert!((g.value - w).abs() <= 1e-9 * w.abs().max(1.0), "{} {}", g.value, w);
    }
}

#[test]
fn friedrichs_of_example_3_11_is_above_one() {
    let (pb, _) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
    let bc = BoundaryCondition::separated(EndCondition::Angle(0.0), EndCondition::Cap);
    let l = eigen_smallest(&discretize(&pb, bc, 4000, trunc()).unwrap(), 1).unwrap()[0].value;
    assert!(l >= 1.0 - 1e-3, "{l}");
}

#[test]
fn krein_zero_mode_of_example_3_11() {
    let (pb, k) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
    let bc = BoundaryCondition::separated(EndCondition::Angle(FRAC_PI_4), EndCondition::Cap);
    let dx = discretize(&pb, bc, 4000, trunc()).unwrap();
    let p = &eigen_smallest(&dx, 1).unwrap()[0];
    assert!(p.value.abs() <= 5e-4, "{}", p.value);
    let v0 = p.vector[0];
    for (x, v) in dx.nodes.iter().zip(&p.vector).step_by(50) {
        assert!((v / v0 - (-x).exp()).abs() <= 1e-3, "{x}");
    }
    let check = krein_zero_mode_check(&pb, bc, 1000, trunc()).unwrap();
    assert!(check.pass, "{check:?}");
    let wrong = BoundaryCondition::separated(EndCondition::Angle(FRAC_PI_3), EndCondition::Cap);
    let check = krein_zero_mode_check(&pb, wrong, 500, trunc()).unwrap();
    assert!(check.boundary_residual > 0.1 && !check.pass);
    assert!(eigenfunction_invariance_check(&dx, &k, &p.vector).unwrap() <= 1e-4);
}

#[test]
fn truncation_length_barely_matters_for_the_zero_mode() {
    let (pb, _) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
    let bc = BoundaryCondition::separated(EndCondition::Angle(FRAC_PI_4), EndCondition::Cap);
    let short = eigen_smallest(&discretize(&pb, bc, 2000, trunc()).unwrap(), 1).unwrap()[0].value;
    let long = Truncation { eps: DEFAULT_EPS, length: 40.0 };
    let long = eigen_smallest(&discretize(&pb, bc, 4000, long).unwrap(), 1).unwrap()[0].value;
    assert!((short - long).abs() <= 1e-6, "{short} {long}");
}

#[test]
fn second_order_convergence() {
    let (pb, _) = gallery::example_3_11(4.0, 3.0, 0.0).build().unwrap();
    let bc = BoundaryCondition::separated(EndCondition::Angle(0.0), EndCondition::Cap);
    let rows = spectrum_table(&pb, bc, &[500, 1000, 2000], trunc(), 1).unwrap();
    let l: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let order = ((l[0] - l[1]) / (l[1] - l[2])).log2();
    assert!(order >= 1.8, "{order} from {l:?}");
}

#[test]
fn invariance_of_eigenfunctions_for_example_3_9() {
    let (pb, k) = gallery::example_3_9(1.0, 3.0).build().unwrap();
    let t = Truncation::for_problem(&pb);
    let ground = |b: EndCondition| {
        let dx = discretize(&pb, BoundaryCondition::separated(EndCondition::Cap, b), 2000, t).unwrap();
        let v = eigen_smallest(&dx, 1).unwrap().remove(0);
        eigenfunction_invariance_check(&dx, &k, &v.vector).unwrap()
    };
    assert!(ground(neumann()) <= 1e-4);
    assert!(ground(EndCondition::Angle(FRAC_PI_3)) > 1e-2);
    assert!(ground(EndCondition::Angle(0.0)) <= 1e-6);
    let check = krein_zero_mode_check(&pb, BoundaryCondition::separated(EndCondition::Cap, neumann()), 1000, t).unwrap();
    assert!(check.boundary_residual <= 1e-8, "{check:?}");
}

#[test]
fn descriptors_round_trip() {
    for s in ["a=dirichlet,b=neumann", "a=cap,b=angle:1.000000000000e0", "coupled=1:0:0:1"] {
        let bc: BoundaryCondition = s.parse().unwrap();
        let again: BoundaryCondition = bc.to_string().parse().unwrap();
        assert_eq!(bc, again);
    }
    let bc: BoundaryCondition = "a=robin:-1,b=cap".parse().unwrap();
    assert_eq!(bc, BoundaryCondition::separated(EndCondition::Angle(FRAC_PI_4), EndCondition::Cap));
    assert!("a=dirichlet".parse::<BoundaryCondition>().is_err());
    assert!("coupled=1:2:3".parse::<BoundaryCondition>().is_err());
}

#[test]
fn friedrichs_dominates_krein_on_the_gallery() {
    let cases = [
        (gallery::example_3_9(1.0, 3.0), BoundaryCondition::separated(EndCondition::Cap, neumann()), EndCondition::Cap),
        (
            gallery::example_3_11(4.0, 3.0, 0.0),
            BoundaryCondition::separated(EndCondition::Angle(FRAC_PI_4), EndCondition::Cap),
            EndCondition::Cap,
        ),
        (gallery::example_2_8(2.0), BoundaryCondition::separated(neumann(), EndCondition::Cap), EndCondition::Cap),
    ];
    for (spec, krein, _) in cases {
        let (pb, _) = spec.build().unwrap();
        let t = Truncation::for_problem(&pb);
        let dirichlet = match krein {
            BoundaryCondition::Separated { a, b } => {
                let d = |e: EndCondition| if matches!(e, EndCondition::Cap) { e } else { EndCondition::Angle(0.0) };
                BoundaryCondition::separated(d(a), d(b))
            }
            other => other,
        };
        let lk = eigen_smallest(&discretize(&pb, krein, 2000, t).unwrap(), 1).unwrap()[0].value;
        let lf = eigen_smallest(&discretize(&pb, dirichlet, 2000, t).unwrap(), 1).unwrap()[0].value;
        assert!(lf >= lk - 1e-8, "{lf} {lk}");
    }
}

