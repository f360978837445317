// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Runs without the libtest harness so the summary is always printed.

use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

use kinvsl::bkvglab::{
    block_condition_display, block_condition_from_domain, build_block_model, check_invariance_condition,
    enumerate_invariant_extensions, row_space_distance, AuxiliaryOperator, CMat, Complex,
};
use kinvsl::extensions::{
    classify_invariant_extensions, coupled_family, coupled_invariance, same_angle, separated_invariance,
    BoundaryTransform,
};
use kinvsl::funcalg::{ExprFn, Interval, Params};
use kinvsl::gallery;
use kinvsl::ktransform::{relative_residual, residual_coefficient_eqs, residual_operator_identity, standard_bumps};
use kinvsl::lgtransform::{lg_build_oriented, lg_transform_k, Orientation};
use kinvsl::slcore::{k_eigenvalue_on_kernel, solve_tau, wronskian, Side};
use kinvsl::spectral::{discretize, eigen_smallest, krein_zero_mode_check, BoundaryCondition, Truncation};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const COEFF_TOL: f64 = 1e-10;
const COEFF_GRID: usize = 1000;
const IDENTITY_TOL: f64 = 1e-5;
const ANGLE_TOL: f64 = 1e-12;
const ZETA_TOL: f64 = 1e-10;
const SPREAD_TOL: f64 = 1e-8;
const KREIN_BAND: f64 = 5e-4;
const KREIN_N: usize = 4000;
const FRIEDRICHS_FLOOR: f64 = 0.999;
const CAP_LENGTH: f64 = 20.0;
const BLOCK_TOL: f64 = 1e-8;
const BLOCK_INTERVALS: usize = 2000;
const LG_TOL: f64 = 1e-9;
const LG_POINTS: usize = 500;
const PROPERTY_CASES: u32 = 1000;
const DERIVATIVE_TOL: f64 = 1e-6;
const WRONSKIAN_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn coefficient_residuals() -> Result<Outcome, String> {
    let mut specs = Vec::new();
    for c in [1.0, 3.0] {
        specs.push(gallery::example_3_9(1.0, c));
    }
    for n in 1..=3 {
        for gamma in [0.0, 0.5] {
            specs.push(gallery::example_3_10(n, 1.0, gamma, 1.0));
        }
    }
    for gamma in [0.0, 1.0] {
        specs.push(gallery::example_3_11(4.0, 3.0, gamma));
    }
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    for spec in &specs {
        let t = Instant::now();
        let (problem, k) = spec.build().map_err(err)?;
        let grid = problem.sample_grid(COEFF_GRID).map_err(err)?;
        let res = residual_coefficient_eqs(&problem, &k, &grid).map_err(err)?;
        worst = worst.max(res.max());
        slowest = slowest.max(t.elapsed());
    }
    let pass = worst <= COEFF_TOL && slowest < Duration::from_secs(1);
    outcome(pass, format!("{} problems, worst residual {worst:.2e}, slowest {slowest:.2?}", specs.len()))
}

fn operator_identity() -> Result<Outcome, String> {
    let (mut worst, mut slowest, mut count) = (0.0f64, Duration::ZERO, 0);
    let mut pass = true;
    for entry in gallery::list().map_err(err)? {
        let t = Instant::now();
        let (problem, k) = entry.spec.build().map_err(err)?;
        let bumps = standard_bumps(&problem).map_err(err)?;
        pass &= bumps.len() == 3;
        for f in &bumps {
            worst = worst.max(residual_operator_identity(&problem, &k, f).map_err(err)?);
        }
        count += 1;
        slowest = slowest.max(t.elapsed());
    }
    pass &= worst <= IDENTITY_TOL && slowest < Duration::from_secs(5);
    outcome(pass, format!("{count} entries x 3 bumps, worst residual {worst:.2e}, slowest {slowest:.2?}"))
}

fn boundary_classification() -> Result<Outcome, String> {
    let t = Instant::now();
    let angles = |spec: kinvsl::problem::ProblemSpec, side: Side| -> Result<Vec<f64>, String> {
        let (problem, k) = spec.build().map_err(err)?;
        let report = classify_invariant_extensions(&problem, &k).map_err(err)?;
        let end = if side == Side::A { &report.a } else { &report.b };
        let list = end.invariant_angles.as_ref().ok_or("whole circle invariant")?;
        Ok(list.iter().map(|a| a.angle).collect())
    };
    let robin = angles(gallery::example_3_11(4.0, 3.0, 0.0), Side::A)?;
    let robin_err = robin.iter().map(|a| (a - FRAC_PI_4).abs()).fold(f64::INFINITY, f64::min);
    let exact = |got: &[f64], want: &[f64]| {
        got.len() == want.len() && want.iter().all(|w| got.iter().any(|g| same_angle(*g, *w, ANGLE_TOL)))
    };
    let half = std::f64::consts::FRAC_PI_2;
    let ex39 = angles(gallery::example_3_9(1.0, 3.0), Side::B)?;
    let ex28 = angles(gallery::example_2_8(2.0), Side::A)?;
    let elapsed = t.elapsed();
    // Angle 0 is Dirichlet (μ = ∞), π/2 is Neumann (μ = 0).
    let pass = robin.len() == 2
        && robin_err <= ANGLE_TOL
        && exact(&ex39, &[0.0, half])
        && exact(&ex28, &[0.0, half])
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!("3.11 |angle - pi/4| = {robin_err:.1e}, 3.9 {ex39:?}, 2.8 {ex28:?}, {elapsed:.2?}"),
    )
}

fn kernel_eigenvalue() -> Result<Outcome, String> {
    let t = Instant::now();
    let (p9, k9) = gallery::example_3_9(1.0, 3.0).build().map_err(err)?;
    let z9 = k_eigenvalue_on_kernel(&p9, &k9).map_err(err)?;
    let (p10, k10) = gallery::example_3_10(2, 1.0, 1.0, 1.0).build().map_err(err)?;
    let z10 = k_eigenvalue_on_kernel(&p10, &k10).map_err(err)?;
    let want10 = 2f64.powf(5f64.sqrt());
    let e9 = (z9.zeta - 2.0).abs() / 2.0;
    let e10 = (z10.zeta - want10).abs() / want10;
    let elapsed = t.elapsed();
    let pass = e9 <= ZETA_TOL
        && e10 <= ZETA_TOL
        && z9.spread <= SPREAD_TOL
        && z10.spread <= SPREAD_TOL
        && elapsed < Duration::from_secs(2);
    outcome(
        pass,
        format!(
            "zeta 3.9 = {:.12} (rel {e9:.1e}), 3.10 = {:.12} (rel {e10:.1e}), spreads {:.1e} {:.1e}, {elapsed:.2?}",
            z9.zeta, z10.zeta, z9.spread, z10.spread
        ),
    )
}

fn krein_zero_mode() -> Result<Outcome, String> {
    let t = Instant::now();
    let (problem, _) = gallery::example_3_11(4.0, 3.0, 0.0).build().map_err(err)?;
    let mut trunc = Truncation::for_problem(&problem);
    trunc.length = CAP_LENGTH;
    let krein: BoundaryCondition = "a=robin:-1,b=cap".parse().map_err(err)?;
    let check = krein_zero_mode_check(&problem, krein, KREIN_N / 4, trunc).map_err(err)?;
    let &(n_last, lambda) = check.lambdas.last().ok_or("no eigenvalues")?;
    let dirichlet: BoundaryCondition = "a=dirichlet,b=cap".parse().map_err(err)?;
    let dx = discretize(&problem, dirichlet, KREIN_N, trunc).map_err(err)?;
    let friedrichs = eigen_smallest(&dx, 1).map_err(err)?[0].value;
    let elapsed = t.elapsed();
    let pass = n_last >= KREIN_N
        && lambda.abs() <= KREIN_BAND
        && check.first_order
        && friedrichs >= FRIEDRICHS_FLOOR
        && elapsed < Duration::from_secs(10);
    let trend: Vec<String> = check.lambdas.iter().map(|(n, l)| format!("{n}:{l:.2e}")).collect();
    outcome(pass, format!("Krein {} first-order {}, Friedrichs {friedrichs:.6}, {elapsed:.2?}", trend.join(" "), check.first_order))
}

fn block_enumeration() -> Result<Outcome, String> {
    let t = Instant::now();
    let (c, d) = (1.0, 3.0);
    let model = build_block_model(c, d, |s| gallery::example_3_9(1.0, s), BLOCK_INTERVALS).map_err(err)?;
    let e = enumerate_invariant_extensions(&model.k_tilde).map_err(err)?;
    let root = 2f64.powf(0.75);
    let mut zetas: Vec<f64> = e.root_spaces.iter().map(|r| r.zeta.re).collect();
    zetas.sort_by(f64::total_cmp);
    let zeta_err = if zetas.len() == 2 {
        (zetas[0] + root).abs().max((zetas[1] - root).abs())
            .max(e.root_spaces.iter().map(|r| r.zeta.im.abs()).fold(0.0, f64::max))
    } else {
        f64::INFINITY
    };
    let (a_c, a_d) = ((1.0 + c).sqrt(), (1.0 + d).sqrt());
    let mut bc_err = f64::INFINITY;
    if e.extensions.len() == 4 {
        bc_err = 0.0;
        for ext in &e.extensions[1..3] {
            let got = block_condition_from_domain(&model, &ext.aux, Side::B).map_err(err)?;
            let lead = ext.zetas.first().map_or(0.0, |z| z.re.signum());
            // T_+ belongs to the positive root, T_- to the negative one.
            let want = block_condition_display(a_c, a_d, if lead > 0.0 { 1.0 } else { -1.0 });
            bc_err = bc_err.max(row_space_distance(&want, &got));
        }
    }
    let elapsed = t.elapsed();
    let pass = e.extensions.len() == 4
        && zeta_err <= BLOCK_TOL
        && bc_err <= BLOCK_TOL
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!("{} extensions, eigenvalue error {zeta_err:.1e}, condition distance {bc_err:.1e}, {elapsed:.2?}", e.extensions.len()),
    )
}

fn defect_one_dichotomy() -> Result<Outcome, String> {
    let t = Instant::now();
    let bs = [
        Complex::new(0.0, 0.0),
        Complex::new(0.5, 0.0),
        Complex::new(1.0, 0.0),
        Complex::new(0.0, 1.0),
        Complex::new(1.0, 1.0),
    ];
    let off = CMat::from_element(1, 1, Complex::new(2.0, 0.0));
    let on = CMat::from_element(1, 1, Complex::from_polar(1.0, 0.7));
    let admitted = |k: &CMat| -> Vec<bool> {
        bs.iter().map(|&b| check_invariance_condition(&AuxiliaryOperator::scalar(b), k).pass).collect()
    };
    let (a_off, a_on) = (admitted(&off), admitted(&on));
    let elapsed = t.elapsed();
    let pass = a_off == [true, false, false, false, false]
        && a_on.iter().all(|&x| x)
        && elapsed < Duration::from_secs(1);
    outcome(pass, format!("|zeta| = 2: {a_off:?}, |zeta| = 1: {a_on:?}, {elapsed:.2?}"))
}

fn liouville_green() -> Result<Outcome, String> {
    let t = Instant::now();
    let (mu, gamma, c) = (4.0, 1.0, 3.0);
    let (problem, k) = gallery::example_3_10(1, mu, gamma, c).build().map_err(err)?;
    let map = lg_build_oriented(&problem, Some(1.0), Orientation::Decreasing).map_err(err)?;
    let lg = lg_transform_k(&problem, &k, &map).map_err(err)?;
    let (target, kt) = gallery::example_3_11(mu, c, gamma).build().map_err(err)?;
    let mut worst = 0.0f64;
    for xi in linspace(0.01, 10.0, LG_POINTS) {
        let v = relative_residual(lg.potential_at(xi).map_err(err)?, target.q.eval(xi));
        let a = relative_residual(lg.a_tilde(xi).map_err(err)?, kt.a.eval(xi));
        let phi = relative_residual(lg.phi_tilde(xi).map_err(err)?, kt.phi.eval(xi));
        worst = worst.max(v).max(a).max(phi);
    }
    let elapsed = t.elapsed();
    let pass = worst <= LG_TOL && elapsed < Duration::from_secs(2);
    outcome(pass, format!("{LG_POINTS} points, worst residual {worst:.2e}, {elapsed:.2?}"))
}

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: PROPERTY_CASES, failure_persistence: None, ..Config::default() })
}

fn transform(side: Side) -> impl Strategy<Value = BoundaryTransform> {
    (0.5..3.0f64, -2.0..2.0f64, 0.2..3.0f64)
        .prop_map(move |(a, a1, phi)| BoundaryTransform::from_values(side, 0.0, a, a1, phi))
}

fn separated_dual_agreement() -> Result<(), String> {
    let side = prop_oneof![Just(Side::A), Just(Side::B)];
    // Draws on or off the invariant set, so both outcomes are exercised.
    let case = side.prop_flat_map(|s| (transform(s), 0.0..std::f64::consts::PI, any::<bool>()));
    runner()
        .run(&case, |(m, angle, snap)| {
            let angle = if snap {
                kinvsl::extensions::separated_invariant_set(&m).angles().map_or(angle, |a| a[a.len() - 1])
            } else {
                angle
            };
            let t = separated_invariance(&m, angle);
            prop_assert!(t.agree(), "{m:?} at {angle}: {t:?}");
            Ok(())
        })
        .map_err(err)
}

fn coupled_necessity() -> Result<(), String> {
    let r = (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_filter_map("singular", |(x, y, z)| {
        (x.abs() > 0.1).then(|| [[x, y], [z, (1.0 + y * z) / x]])
    });
    let case = (transform(Side::A), transform(Side::B), r).prop_filter("equal weights", |(ma, mb, _)| {
        (ma.a - mb.a).abs() > 1e-6
    });
    runner()
        .run(&case, |(ma, mb, r)| {
            let t = coupled_invariance(&ma, &mb, &r).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(!t.necessity_violated, "{ma:?} {mb:?} {r:?}");
            prop_assert!(!coupled_family(&ma, &mb).admits_sl2, "{ma:?} {mb:?}");
            Ok(())
        })
        .map_err(err)
}

fn c64(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn root_space_necessity() -> Result<(), String> {
    let modulus = prop_oneof![0.1..0.8f64, 1.25..3.0f64];
    let entry = || (-1.0..1.0f64, -1.0..1.0f64);
    let case = (
        modulus,
        0.0..std::f64::consts::TAU,
        (0.1..3.0f64, 0.0..std::f64::consts::TAU),
        [entry(), entry(), entry(), entry()],
        [entry(), entry(), entry(), entry()],
        any::<bool>(),
    );
    runner()
        .run(&case, |(rho, arg, (rho2, arg2), s, g, line)| {
            let zeta = Complex::from_polar(rho, arg);
            let other = Complex::from_polar(rho2, arg2);
            prop_assume!((zeta - other).norm() > 0.05);
            let basis = CMat::from_iterator(2, 2, s.iter().map(|&(x, y)| c64(x, y)));
            let det = basis[(0, 0)] * basis[(1, 1)] - basis[(0, 1)] * basis[(1, 0)];
            prop_assume!(det.norm() > 0.1);
            let inv = basis.clone().try_inverse().ok_or_else(|| TestCaseError::reject("singular"))?;
            let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![zeta, other]));
            let k_tilde = &basis * diag * inv;
            let v = basis.column(0).normalize();
            let (domain, b) = if line {
                // D(B) = the eigenline itself, B = positive scalar.
                let w = g[0].0.abs() + 0.1;
                (CMat::from_columns(&[v.clone()]), CMat::from_element(1, 1, c64(w, 0.0)))
            } else {
                let m = CMat::from_iterator(2, 2, g.iter().map(|&(x, y)| c64(x, y)));
                (CMat::identity(2, 2), &m * m.adjoint())
            };
            let aux = AuxiliaryOperator::new(domain, b).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let bv = &aux.b * (aux.domain.adjoint() * &v);
            prop_assume!(bv.norm() > 0.05);
            prop_assert!(!check_invariance_condition(&aux, &k_tilde).pass, "zeta {zeta}, K {k_tilde}");
            Ok(())
        })
        .map_err(err)
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (-3.0..3.0f64).prop_map(|c| format!("({c:.3})")),
        (1u32..4).prop_map(|n| format!("x^{n}")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}-{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}*{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}/(2+cos({b})))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("ln(1+({a})^2)")),
            inner.prop_map(|a| format!("sqrt(2+sin({a}))")),
        ]
    })
}

fn derivative_agreement() -> Result<(), String> {
    let dom = Interval::new(0.0, 1.0).map_err(err)?;
    let params = Params::new();
    runner()
        .run(&(expression(), 0.05..0.95f64), |(src, x)| {
            let f = ExprFn::parse(&src, &params, dom).map_err(|e| TestCaseError::fail(format!("{src}: {e}")))?;
            let df = f.derivative().eval(x);
            // Fourth-order central difference.
            let h = 1e-3;
            let fd = (8.0 * (f.eval(x + h) - f.eval(x - h)) - (f.eval(x + 2.0 * h) - f.eval(x - 2.0 * h))) / (12.0 * h);
            let scale = 1.0 + df.abs() + f.eval(x).abs();
            prop_assert!((df - fd).abs() <= DERIVATIVE_TOL * scale, "{src} at {x}: {df} vs {fd}");
            Ok(())
        })
        .map_err(err)
}

fn wronskian_constancy() -> Result<(), String> {
    let problems = [
        (gallery::example_3_9(1.0, 3.0).build().map_err(err)?.0, 0.05, 0.95),
        (gallery::example_3_11(4.0, 3.0, 1.0).build().map_err(err)?.0, 0.1, 6.0),
    ];
    let init = || (-1.0..1.0f64, -1.0..1.0f64);
    let case = (0..problems.len(), -2.0..2.0f64, 0.0..1.0f64, init(), init(), [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]);
    runner()
        .run(&case, |(which, z, start, u0, v0, probes)| {
            let (problem, lo, hi) = &problems[which];
            let x0 = lo + (hi - lo) * start;
            let fail = |e: kinvsl::Error| TestCaseError::fail(e.to_string());
            let u = solve_tau(problem, z, x0, u0, *lo, *hi).map_err(fail)?;
            let v = solve_tau(problem, z, x0, v0, *lo, *hi).map_err(fail)?;
            let w0 = u0.0 * v0.1 - u0.1 * v0.0;
            let mut scale: f64 = 1.0;
            for x in [*lo, *hi] {
                let (a, b) = (u.eval(x).map_err(fail)?, v.eval(x).map_err(fail)?);
                scale = scale.max((a.0 * b.1).abs() + (a.1 * b.0).abs());
            }
            for p in probes {
                let x = lo + (hi - lo) * p;
                let w = wronskian(&u, &v, x).map_err(fail)?;
                prop_assert!((w - w0).abs() <= WRONSKIAN_TOL * scale, "x = {x}: {w} vs {w0} (scale {scale})");
            }
            Ok(())
        })
        .map_err(err)
}

fn property_suites() -> Result<Outcome, String> {
    let t = Instant::now();
    let suites: [(&str, fn() -> Result<(), String>); 5] = [
        ("separated dual tests", separated_dual_agreement),
        ("coupled necessity", coupled_necessity),
        ("root-space necessity", root_space_necessity),
        ("symbolic derivative", derivative_agreement),
        ("Wronskian constancy", wronskian_constancy),
    ];
    let mut failed = Vec::new();
    for (name, suite) in suites {
        if let Err(e) = suite() {
            eprintln!("  {name}: {e}");
            failed.push(name);
        }
    }
    let elapsed = t.elapsed();
    let pass = failed.is_empty() && elapsed < Duration::from_secs(60);
    outcome(pass, format!("5 suites x {PROPERTY_CASES} cases, failed {failed:?}, {elapsed:.2?}"))
}

fn main() {
    // `cargo test -- --list` and similar harness flags: nothing to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, Check); 9] = [
        ("coefficient equations", coefficient_residuals),
        ("operator identity", operator_identity),
        ("boundary classification", boundary_classification),
        ("kernel eigenvalue", kernel_eigenvalue),
        ("Krein zero mode", krein_zero_mode),
        ("block enumeration", block_enumeration),
        ("defect-one dichotomy", defect_one_dichotomy),
        ("Liouville-Green", liouville_green),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!("criterion {} {:<24} {}  {detail}", i + 1, name, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
