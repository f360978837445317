//! Bundled (problem, K) pairs with known closed-form answers.

use crate::funcalg::{ExprFn, Params};
use crate::problem::{Bound, KSpec, ProblemSpec};
use crate::schroeder;
use crate::Result;

/// φ_c(x) = (1+c)x/(1+cx) on (0, 1).
const MOBIUS_PHI: &str = "(1+c)*x/(1+c*x)";
const MOBIUS_PHI_INV: &str = "x/(1+c-c*x)";

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn spec(
    id: &str,
    interval: (f64, f64),
    pqr: (&str, &str, &str),
    k: (&str, &str, Option<&str>),
    ps: &[(&str, f64)],
    truncation: Option<f64>,
) -> ProblemSpec {
    ProblemSpec {
        interval: [Bound(interval.0), Bound(interval.1)],
        p: pqr.0.into(),
        q: pqr.1.into(),
        r: pqr.2.into(),
        params: params(ps),
        k: KSpec { a: k.0.into(), phi: k.1.into(), phi_inv: k.2.map(Into::into), c: 1.0 },
        gallery_id: Some(id.into()),
        truncation,
    }
}

/// -f'' on the half-line with the dilation (Kf)(x) = λ^{-1/2} f(λx).
pub fn example_2_8(lambda: f64) -> ProblemSpec {
    spec(
        "example_2_8",
        (0.0, f64::INFINITY),
        ("1", "0", "1"),
        ("lambda^(-1/2)", "lambda*x", Some("x/lambda")),
        &[("lambda", lambda)],
        Some(20.0),
    )
}

/// p = μx², q = 0, r = 1 on (0, 1) with A = (1+c)^{1/2}.
pub fn example_3_9(mu: f64, c: f64) -> ProblemSpec {
    spec(
        "example_3_9",
        (0.0, 1.0),
        ("mu*x^2", "0", "1"),
        ("(1+c)^(1/2)", MOBIUS_PHI, Some(MOBIUS_PHI_INV)),
        &[("mu", mu), ("c", c)],
        None,
    )
}

/// The power family seeded by `example_3_9`, with a potential.
pub fn example_3_10(n: u32, mu: f64, gamma: f64, c: f64) -> ProblemSpec {
    let id = format!("example_3_10_n{n}");
    spec(
        &id,
        (0.0, 1.0),
        ("mu^n*x^(n+1)*(1-x)^(1-n)/n", "n*gamma^n*x^(n-1)*(1-x)^(-n-1)", "1"),
        ("(1+c)^(n/2)", MOBIUS_PHI, Some(MOBIUS_PHI_INV)),
        &[("n", n as f64), ("mu", mu), ("gamma", gamma), ("c", c)],
        None,
    )
}

/// Schrödinger operator on the half-line with a Bessel-type singularity at 0.
pub fn example_3_11(mu: f64, c: f64, gamma: f64) -> ProblemSpec {
    spec(
        "example_3_11",
        (0.0, f64::INFINITY),
        ("1", "gamma/(1-exp(-sqrt(mu)*x))^2+mu/4", "1"),
        (
            "(1+c*exp(-sqrt(mu)*x))^(1/2)",
            "-ln((1+c)*exp(-sqrt(mu)*x)/(1+c*exp(-sqrt(mu)*x)))/sqrt(mu)",
            Some("-ln(exp(-sqrt(mu)*x)/(1+c-c*exp(-sqrt(mu)*x)))/sqrt(mu)"),
        ),
        &[("mu", mu), ("c", c), ("gamma", gamma)],
        Some(20.0),
    )
}

/// Scalar building block of the 2×2 block example: `example_3_9` with both
/// similarity parameters recorded.
pub fn example_3_14(mu: f64, c: f64, d: f64) -> ProblemSpec {
    let mut s = example_3_9(mu, c);
    s.gallery_id = Some("example_3_14".into());
    s.params.insert("d".into(), d);
    s
}

/// Antiderivative of -1/p for `example_3_9`, vanishing at x = 1.
pub const EXAMPLE_3_9_SEED: &str = "(x^(-1)-1)/mu";

fn seed_3_9(mu: f64, c: f64) -> Result<(ProblemSpec, schroeder::Seed)> {
    let s = example_3_9(mu, c);
    let (problem, k) = s.build()?;
    let anti = ExprFn::parse(EXAMPLE_3_9_SEED, &s.params, problem.interval)?;
    let seed = schroeder::seed(&problem, &k, anti, Some(1.0))?;
    Ok((s, seed))
}

/// p_n = p/(n P^{n-1}) generated from the seed P = μ⁻¹(x⁻¹ - 1).
pub fn remark_3_6_power(n: u32, mu: f64, c: f64) -> Result<ProblemSpec> {
    let (mut s, seed) = seed_3_9(mu, c)?;
    let fam = schroeder::family_power(&seed, n)?;
    s.gallery_id = Some("remark_3_6_power".into());
    s.p = fam.p.to_string();
    s.k.a = format!("{:e}", fam.a);
    s.params.insert("n".into(), n as f64);
    Ok(s)
}

/// Periodic modulation of the seed by G(t) = `amplitude` + sin(2πt/ln(1+c)).
pub fn remark_3_6_periodic(amplitude: f64, mu: f64, c: f64) -> Result<ProblemSpec> {
    let (mut s, seed) = seed_3_9(mu, c)?;
    let g = format!("{amplitude:e}+sin(2*pi*x/ln({:e}))", 1.0 + c);
    let modulation = ExprFn::parse(&g, &Params::new(), seed.problem.interval)?;
    let fam = schroeder::family_periodic(&seed, &modulation)?;
    s.gallery_id = Some("remark_3_6_periodic".into());
    s.p = fam.p.to_string();
    s.params.insert("amplitude".into(), amplitude);
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub id: &'static str,
    pub title: &'static str,
    pub spec: ProblemSpec,
}

/// Every bundled entry at its default parameters.
pub fn list() -> Result<Vec<GalleryEntry>> {
    Ok(vec![
        GalleryEntry { id: "example_2_8", title: "dilation of -f'' on the half-line, lambda = 2", spec: example_2_8(2.0) },
        GalleryEntry { id: "example_3_9", title: "p = mu x^2 on (0,1), mu = 1, c = 3", spec: example_3_9(1.0, 3.0) },
        GalleryEntry {
            id: "example_3_10_n1",
            title: "power family n = 1, mu = 1, gamma = 0.5, c = 1",
            spec: example_3_10(1, 1.0, 0.5, 1.0),
        },
        GalleryEntry {
            id: "example_3_10_n2",
            title: "power family n = 2, gamma = mu = 1, c = 1",
            spec: example_3_10(2, 1.0, 1.0, 1.0),
        },
        GalleryEntry {
            id: "example_3_10_n3",
            title: "power family n = 3, mu = 1, gamma = 0.5, c = 1",
            spec: example_3_10(3, 1.0, 0.5, 1.0),
        },
        GalleryEntry {
            id: "example_3_11",
            title: "half-line Schroedinger operator, mu = 4, c = 3, gamma = 0",
            spec: example_3_11(4.0, 3.0, 0.0),
        },
        GalleryEntry { id: "example_3_14", title: "2x2 block operator, c = 1, d = 3", spec: example_3_14(1.0, 1.0, 3.0) },
        GalleryEntry { id: "remark_3_6_power", title: "generated power family, n = 3", spec: remark_3_6_power(3, 1.0, 1.0)? },
        GalleryEntry {
            id: "remark_3_6_periodic",
            title: "periodic modulation G = 12 + sin(2 pi t / ln 2)",
            spec: remark_3_6_periodic(12.0, 1.0, 1.0)?,
        },
    ])
}

pub fn find(id: &str) -> Result<GalleryEntry> {
    list()?
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| crate::Error::Input(format!("unknown gallery id {id:?}")))
}
