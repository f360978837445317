//! `kinvsl` command line: verify, classify, spectrum, schroeder, transform,
//! gallery and abstract-lab.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation cannot be completed, 2 for unusable input.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bkvglab::{
    build_block_model, build_scalar_model, check_invariance_condition, enumerate_invariant_extensions, AuxiliaryOperator,
    CMat, Complex, DefectModel, Enumeration, C64, DEFAULT_INTERVALS,
};
use crate::extensions::classify_invariant_extensions;
use crate::funcalg::ExprFn;
use crate::gallery;
use crate::ktransform::{check_boundedness, residual_coefficient_eqs, residual_operator_identity, standard_bumps};
use crate::lgtransform::{lg_build_oriented, lg_transform_k, Orientation, LG_TOL};
use crate::numerics::linspace;
use crate::problem::ProblemSpec;
use crate::schroeder;
use crate::slcore::{k_eigenvalue_on_kernel, kernel_basis};
use crate::spectral::{spectrum_csv, spectrum_table, BoundaryCondition, Truncation, DEFAULT_EPS};
use crate::Error;
use report::{float, render, to_value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Default tolerance for the coefficient equations.
pub const TOL_RESIDUAL: f64 = 1e-10;
/// Default tolerance for the relative operator-identity residual.
pub const TOL_OPERATOR: f64 = 1e-5;
/// Default bound on eigenpair residuals.
pub const TOL_EIG: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "kinvsl", version, about = "K-invariant Sturm-Liouville operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Problem file (JSON), or gallery:<id>.
    pub spec: String,
    /// Override a parameter: --set name=value (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coefficient equations and the operator identity K*τK = τ.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long = "tol-residual", default_value_t = TOL_RESIDUAL)]
        tol_residual: f64,
        #[arg(long = "tol-operator", default_value_t = TOL_OPERATOR)]
        tol_operator: f64,
    },
    /// Endpoint classes, invariant boundary conditions, Friedrichs/Krein tags.
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Smallest eigenvalues of a discretized extension, as CSV.
    Spectrum {
        #[command(flatten)]
        spec: SpecArgs,
        /// Boundary descriptor, e.g. a=dirichlet,b=robin:1 or coupled=1:0:0:1.
        #[arg(long, default_value = "a=dirichlet,b=dirichlet")]
        bc: String,
        /// Grid intervals; a comma-separated list gives one block per size.
        #[arg(long = "N", default_value = "2000")]
        n: String,
        /// Working length for infinite ends.
        #[arg(long = "L")]
        length: Option<f64>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long = "tol-eig", default_value_t = TOL_EIG)]
        tol_eig: f64,
    },
    /// Schröder-equation seeds, Koenigs linearization and generated families.
    Schroeder {
        #[command(flatten)]
        spec: SpecArgs,
        /// Antiderivative P of ±1/p to validate as a seed.
        #[arg(long)]
        antiderivative: Option<String>,
        /// Endpoint where P must vanish.
        #[arg(long)]
        anchor: Option<f64>,
        /// Generate the power family of order n from the seed.
        #[arg(long)]
        power: Option<u32>,
        /// Koenigs function at this attracting fixed point of φ.
        #[arg(long)]
        koenigs: Option<f64>,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long = "tol-residual", default_value_t = 1e-9)]
        tol_residual: f64,
    },
    /// Liouville–Green transformation to Schrödinger form.
    Transform {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        anchor: Option<f64>,
        #[arg(long, default_value = "decreasing")]
        orientation: String,
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Write (xi, x, V, A_tilde, phi_tilde) samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long = "tol-residual", default_value_t = LG_TOL)]
        tol_residual: f64,
    },
    /// Bundled examples.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Auxiliary-operator parameterization of extensions on the discrete kernel.
    AbstractLab {
        /// Problem file or gallery:<id>; a parameter `d` selects the block model.
        spec: Option<String>,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// Synthetic one-dimensional kernel with K̃ = ζ (re or re:im).
        #[arg(long)]
        zeta: Option<String>,
        /// Values of B to test on a one-dimensional kernel, e.g. 0,0.5,1,i,1+i.
        #[arg(long)]
        b: Option<String>,
        #[arg(long = "N", default_value_t = DEFAULT_INTERVALS)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GalleryAction {
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Run {
        id: String,
        /// Order of the generated power family (remark_3_6_power).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Input(_) | Error::Syntax { .. } | Error::UnknownIdentifier { .. } => EXIT_INPUT,
            _ => EXIT_FAIL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: msg.into() }
}

type Outcome = std::result::Result<(Value, bool), Failure>;

/// Read a spec file or a gallery entry and apply `--set` overrides.
pub fn load_spec(source: &str, set: &[String]) -> std::result::Result<ProblemSpec, Failure> {
    let mut spec = if let Some(id) = source.strip_prefix("gallery:") {
        gallery::find(id)?.spec
    } else {
        let text = std::fs::read_to_string(source).map_err(|e| input(format!("cannot read {source}: {e}")))?;
        ProblemSpec::from_json(&text)?
    };
    for item in set {
        let (name, value) = item.split_once('=').ok_or_else(|| input(format!("--set expects NAME=VALUE, got {item:?}")))?;
        let v: f64 = value.trim().parse().map_err(|_| input(format!("bad value in --set {item:?}")))?;
        spec.params.insert(name.trim().to_string(), v);
    }
    Ok(spec)
}

fn label(spec: &ProblemSpec, source: &str) -> String {
    spec.gallery_id.clone().unwrap_or_else(|| source.to_string())
}

/// Coefficient and operator-identity checks as a JSON report.
pub fn verify_report(spec: &ProblemSpec, grid: usize, tol_residual: f64, tol_operator: f64) -> Outcome {
    let (problem, k) = spec.build()?;
    let xs = problem.sample_grid(grid)?;
    let res = residual_coefficient_eqs(&problem, &k, &xs)?;
    let bumps = standard_bumps(&problem)?;
    let ops = bumps.iter().map(|f| residual_operator_identity(&problem, &k, f)).collect::<crate::Result<Vec<f64>>>()?;
    let bounded = check_boundedness(&k, &problem, 1000);
    let mut failed = Vec::new();
    for (name, v) in [("res_r", res.res_r), ("res_p", res.res_p), ("res_q", res.res_q)] {
        if !(v <= tol_residual) {
            failed.push(name.to_string());
        }
    }
    for (i, v) in ops.iter().enumerate() {
        if !(*v <= tol_operator) {
            failed.push(format!("operator_identity[{i}]"));
        }
    }
    if !bounded.ok {
        failed.push("boundedness".into());
    }
    let pass = failed.is_empty();
    let report = json!({
        "command": "verify",
        "grid": grid,
        "coefficient_residuals": {"res_r": float(res.res_r), "res_p": float(res.res_p), "res_q": float(res.res_q)},
        "tolerance_residual": tol_residual,
        "operator_identity": ops.iter().map(|&v| float(v)).collect::<Vec<_>>(),
        "tolerance_operator": tol_operator,
        "boundedness": {
            "sup_a2_over_dphi": float(bounded.sup_ratio_1),
            "sup_dphi_over_a2": float(bounded.sup_ratio_2),
            "ok": bounded.ok,
        },
        "failed": failed,
        "pass": pass,
    });
    Ok((report, pass))
}

/// Endpoint classification, invariant sets and the Krein tag.
pub fn classify_report(spec: &ProblemSpec) -> Outcome {
    let (problem, k) = spec.build()?;
    let rep = classify_invariant_extensions(&problem, &k)?;
    let zeta = match k_eigenvalue_on_kernel(&problem, &k) {
        Ok(z) => to_value(&z),
        Err(e) => json!({"error": e.to_string()}),
    };
    let end = |r: &crate::extensions::EndpointReport| {
        let invariant = match (&r.invariant_angles, &r.invariant) {
            (Some(list), _) => to_value(list),
            (None, Some(set)) => to_value(set),
            (None, None) => Value::Null,
        };
        json!({"kind": to_value(&r.class.kind), "invariant": invariant})
    };
    let summary = json!({
        "a": end(&rep.a),
        "b": end(&rep.b),
        "friedrichs": rep.friedrichs.clone(),
        "krein": rep.krein.as_ref().map(|t| t.condition.name),
        "kernel_dimension": rep.kernel_dimension,
    });
    Ok((json!({"command": "classify", "summary": summary, "report": to_value(&rep), "zeta": zeta}), true))
}

fn parse_sizes(s: &str) -> std::result::Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| input(format!("bad grid size {t:?}"))))
        .collect()
}

/// Eigenvalue table; the bool is false when a residual exceeds `tol_eig`.
pub fn spectrum_rows(
    spec: &ProblemSpec,
    bc: &str,
    sizes: &[usize],
    length: Option<f64>,
    count: usize,
    tol_eig: f64,
) -> std::result::Result<(String, bool), Failure> {
    let (problem, _) = spec.build()?;
    let infinite = !problem.interval.a.is_finite() || !problem.interval.b.is_finite();
    if infinite && length.is_none() && problem.truncation.is_none() {
        return Err(input("an infinite endpoint needs --L or a truncation in the spec file"));
    }
    let bc: BoundaryCondition = bc.parse()?;
    let mut trunc = Truncation::for_problem(&problem);
    if let Some(l) = length {
        if !(l > 0.0) {
            return Err(input("--L must be positive"));
        }
        trunc.length = l;
    }
    trunc.eps = DEFAULT_EPS;
    let rows = spectrum_table(&problem, bc, sizes, trunc, count)?;
    let ok = rows.iter().all(|r| r.residual <= tol_eig);
    Ok((spectrum_csv(&rows), ok))
}

pub fn schroeder_report(
    spec: &ProblemSpec,
    antiderivative: Option<&str>,
    anchor: Option<f64>,
    power: Option<u32>,
    koenigs_at: Option<f64>,
    grid: usize,
    tol: f64,
) -> Outcome {
    let (problem, k) = spec.build()?;
    let xs = problem.sample_grid(grid)?;
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("schroeder"));
    out.insert("A_constant".into(), k.a.as_const().map_or(Value::Null, float));
    let mut pass = true;
    if let Some(src) = antiderivative {
        let anti = ExprFn::parse(src, &spec.params, problem.interval)?;
        let a = k.a.as_const().ok_or_else(|| Failure::from(Error::Validation("the weight A must be constant".into())))?;
        let (grow, shrink) = schroeder::orientations(&anti, &k, a, &xs);
        out.insert("orientation_residuals".into(), json!({"A^2": float(grow), "A^-2": float(shrink)}));
        match schroeder::seed(&problem, &k, anti, anchor) {
            Ok(seed) => {
                out.insert("seed".into(), json!({"valid": true, "sign": seed.sign, "A": seed.a}));
                if let Some(n) = power {
                    let fam = schroeder::family_power(&seed, n)?;
                    let mut generated = spec.clone();
                    generated.p = fam.p.to_string();
                    generated.k.a = format!("{:e}", fam.a);
                    generated.gallery_id = None;
                    generated.params.insert("n".into(), n as f64);
                    pass &= fam.residuals.max() <= tol;
                    out.insert(
                        "family".into(),
                        json!({
                            "n": n,
                            "p": fam.p.to_string(),
                            "A": fam.a,
                            "residuals": {"res_r": float(fam.residuals.res_r), "res_p": float(fam.residuals.res_p), "res_q": float(fam.residuals.res_q)},
                            "spec": serde_json::to_value(&generated).expect("spec serializes"),
                        }),
                    );
                }
            }
            Err(e) => {
                pass = false;
                out.insert("seed".into(), json!({"valid": false, "error": e.to_string()}));
            }
        }
    } else if power.is_some() {
        return Err(input("--power needs --antiderivative"));
    }
    if let Some(d) = koenigs_at {
        let sigma = schroeder::koenigs(&k.phi, d, 200)?;
        let lam = sigma.multiplier();
        // σ(φ(x)) = λσ(x) on the part of the grid inside the basin sample.
        let near: Vec<f64> = xs.iter().copied().filter(|x| (x - d).abs() <= 0.5 * (xs[xs.len() - 1] - xs[0])).collect();
        let res = schroeder::verify_schroeder(&sigma, &k.phi, lam, &near);
        pass &= res <= tol;
        out.insert("koenigs".into(), json!({"fixed_point": d, "multiplier": lam, "residual": float(res)}));
    }
    out.insert("pass".into(), json!(pass));
    Ok((Value::Object(out), pass))
}

pub fn transform_report(
    spec: &ProblemSpec,
    anchor: Option<f64>,
    orientation: &str,
    points: usize,
    tol: f64,
) -> std::result::Result<(Value, bool, String), Failure> {
    let orientation = match orientation {
        "increasing" => Orientation::Increasing,
        "decreasing" => Orientation::Decreasing,
        other => return Err(input(format!("orientation must be increasing or decreasing, got {other:?}"))),
    };
    let (problem, k) = spec.build()?;
    let map = lg_build_oriented(&problem, anchor, orientation)?;
    let t = lg_transform_k(&problem, &k, &map)?;
    let (lo, hi) = map.tabulated_range();
    let (x0, x1) = problem.working_bounds()?;
    let xs = linspace(x0 + 0.01 * (x1 - x0), x1 - 0.01 * (x1 - x0), points.max(2));
    let mut csv = String::from("xi,x,V,A_tilde,phi_tilde\n");
    for &x in &xs {
        let xi = map.xi_at(x)?;
        csv.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            xi,
            x,
            t.potential_at(xi)?,
            t.a_tilde(xi)?,
            t.phi_tilde(xi)?
        ));
    }
    let res = t.residuals;
    let pass = res.max() <= tol;
    let report = json!({
        "command": "transform",
        "anchor": map.anchor,
        "orientation": format!("{:?}", map.orientation).to_lowercase(),
        "xi_range": [float(map.cal_a), float(map.cal_b)],
        "tabulated_xi": [float(lo), float(hi)],
        "potential": t.potential.to_string(),
        "residuals": {"res_r": float(res.res_r), "res_p": float(res.res_p), "res_q": float(res.res_q)},
        "tolerance_residual": tol,
        "pass": pass,
    });
    Ok((report, pass, csv))
}

fn complex_value(z: C64) -> Value {
    json!({"re": float(z.re), "im": float(z.im)})
}

fn matrix_value(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect())
}

/// Parse "1", "-0.5", "i", "2i", "1+i", "0.5-2i", or "re:im".
pub fn parse_complex(s: &str) -> std::result::Result<C64, Failure> {
    let bad = || input(format!("bad complex number {s:?}"));
    let t = s.trim().replace(' ', "");
    if let Some((re, im)) = t.split_once(':') {
        return Ok(Complex::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let split = body.char_indices().skip(1).filter(|&(i, ch)| (ch == '+' || ch == '-') && !body[..i].ends_with('e')).last();
    let (re, im) = match split {
        Some((i, _)) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().map_err(|_| bad())?,
    };
    Ok(Complex::new(re.parse().map_err(|_| bad())?, im))
}

pub fn enumeration_value(e: &Enumeration) -> Value {
    json!({
        "root_spaces": e.root_spaces.iter().map(|r| json!({
            "zeta": complex_value(r.zeta),
            "multiplicity": r.multiplicity,
            "eigenvectors": matrix_value(&r.eigenvectors),
            "defective": r.defective(),
            "unimodular": r.unimodular(),
        })).collect::<Vec<_>>(),
        "extensions": e.extensions.iter().map(|x| json!({
            "label": x.label,
            "dimension": x.aux.dimension(),
            "domain": matrix_value(&x.aux.domain),
            "zetas": x.zetas.iter().map(|&z| complex_value(z)).collect::<Vec<_>>(),
            "domain_residual": float(x.check.domain_residual),
            "condition_residual": float(x.check.condition_residual),
            "verified": x.check.pass,
        })).collect::<Vec<_>>(),
        "families": e.families.iter().map(|f| json!({
            "label": f.label,
            "solution_dimension": f.solution_dimension,
            "dissipative": f.dissipative,
            "representative": matrix_value(&f.representative.b),
            "verified": f.check.pass,
        })).collect::<Vec<_>>(),
        "count": e.extensions.len(),
        "infinite": e.infinite,
        "warnings": e.warnings,
    })
}

fn model_value(m: &DefectModel) -> Value {
    json!({
        "copies": m.copies,
        "kernel_dimension": m.dimension(),
        "intervals": m.friedrichs.intervals(),
        "k_tilde": matrix_value(&m.k_tilde),
        "off_span": float(m.off_span),
    })
}

/// Enumeration for a problem (block when it carries a parameter `d`), or
/// for a synthetic one-dimensional kernel.
pub fn abstract_lab_report(spec: Option<&ProblemSpec>, zeta: Option<C64>, bs: &[C64], n: usize) -> Outcome {
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("abstract-lab"));
    let k_tilde = match (spec, zeta) {
        (_, Some(z)) => {
            out.insert("model".into(), json!({"synthetic": true, "k_tilde": matrix_value(&CMat::from_element(1, 1, z))}));
            CMat::from_element(1, 1, z)
        }
        (Some(spec), None) => {
            let model = match (spec.params.get("c"), spec.params.get("d")) {
                (Some(&c), Some(&d)) => {
                    let base = spec.clone();
                    build_block_model(c, d, move |s| base.clone().with_param("c", s), n)?
                }
                _ => {
                    let (problem, k) = spec.build()?;
                    let basis = kernel_basis(&problem)?;
                    if basis.dimension == 0 {
                        out.insert("note".into(), json!("trivial kernel: only D(B) = {0}"));
                    }
                    build_scalar_model(&problem, &k, n)?
                }
            };
            out.insert("model".into(), model_value(&model));
            model.k_tilde.clone()
        }
        (None, None) => return Err(input("abstract-lab needs a spec or --zeta")),
    };
    let e = enumerate_invariant_extensions(&k_tilde)?;
    let mut pass = e.extensions.iter().all(|x| x.check.pass) && e.families.iter().all(|f| f.check.pass);
    out.insert("enumeration".into(), enumeration_value(&e));
    if !bs.is_empty() {
        if k_tilde.nrows() != 1 {
            return Err(input("--b needs a one-dimensional kernel"));
        }
        let mut rows = Vec::new();
        for &b in bs {
            let aux = AuxiliaryOperator::scalar(b);
            let kind = aux.kind().map(|k| format!("{k:?}").to_lowercase()).unwrap_or_else(|e| e.to_string());
            let check = check_invariance_condition(&aux, &k_tilde);
            pass &= check.condition_residual.is_finite();
            rows.push(json!({"b": complex_value(b), "kind": kind, "invariant": check.pass, "residual": float(check.condition_residual)}));
        }
        out.insert("b_checks".into(), Value::Array(rows));
    }
    out.insert("pass".into(), json!(pass));
    Ok((Value::Object(out), pass))
}

pub fn gallery_list() -> std::result::Result<Value, Failure> {
    let entries = gallery::list()?;
    Ok(json!({
        "command": "gallery list",
        "entries": entries.iter().map(|e| json!({"id": e.id, "title": e.title})).collect::<Vec<_>>(),
    }))
}

pub fn gallery_run(id: &str, n: Option<u32>, set: &[String]) -> Outcome {
    let spec = match (id, n) {
        ("remark_3_6_power", Some(n)) => {
            let base = gallery::find(id)?.spec;
            let (mu, c) = (base.params["mu"], base.params["c"]);
            gallery::remark_3_6_power(n, mu, c)?
        }
        (_, Some(_)) => return Err(input("--n applies to remark_3_6_power only")),
        _ => gallery::find(id)?.spec,
    };
    let mut spec = spec;
    for item in set {
        let (name, value) = item.split_once('=').ok_or_else(|| input(format!("--set expects NAME=VALUE, got {item:?}")))?;
        spec.params.insert(name.into(), value.parse().map_err(|_| input(format!("bad value in --set {item:?}")))?);
    }
    let (verify, v_ok) = verify_report(&spec, 1000, TOL_RESIDUAL, TOL_OPERATOR)?;
    let (classify, _) = classify_report(&spec)?;
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("gallery run"));
    out.insert("id".into(), json!(id));
    out.insert("spec".into(), serde_json::to_value(&spec).expect("spec serializes"));
    out.insert("verify".into(), verify);
    out.insert("classify".into(), classify);
    let mut pass = v_ok;
    if spec.params.contains_key("d") {
        let (lab, ok) = abstract_lab_report(Some(&spec), None, &[], DEFAULT_INTERVALS)?;
        pass &= ok;
        out.insert("abstract_lab".into(), lab);
    }
    out.insert("pass".into(), json!(pass));
    Ok((Value::Object(out), pass))
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| input(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_FAIL, message: e.to_string() }),
    }
}

fn finish(value: Value, pass: bool, out: Option<&PathBuf>, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    emit(&render(&value), out, stdout)?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match cli.command {
        Command::Verify { spec, grid, tol_residual, tol_operator } => {
            let ps = load_spec(&spec.spec, &spec.set)?;
            let (mut v, pass) = verify_report(&ps, grid, tol_residual, tol_operator)?;
            v["spec"] = json!(label(&ps, &spec.spec));
            finish(v, pass, spec.out.as_ref(), stdout)
        }
        Command::Classify { spec } => {
            let ps = load_spec(&spec.spec, &spec.set)?;
            let (mut v, pass) = classify_report(&ps)?;
            v["spec"] = json!(label(&ps, &spec.spec));
            finish(v, pass, spec.out.as_ref(), stdout)
        }
        Command::Spectrum { spec, bc, n, length, count, tol_eig } => {
            let ps = load_spec(&spec.spec, &spec.set)?;
            let (csv, ok) = spectrum_rows(&ps, &bc, &parse_sizes(&n)?, length, count, tol_eig)?;
            emit(&csv, spec.out.as_ref(), stdout)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Schroeder { spec, antiderivative, anchor, power, koenigs, grid, tol_residual } => {
            let ps = load_spec(&spec.spec, &spec.set)?;
            let (mut v, pass) = schroeder_report(&ps, antiderivative.as_deref(), anchor, power, koenigs, grid, tol_residual)?;
            v["spec"] = json!(label(&ps, &spec.spec));
            finish(v, pass, spec.out.as_ref(), stdout)
        }
        Command::Transform { spec, anchor, orientation, points, csv, tol_residual } => {
            let ps = load_spec(&spec.spec, &spec.set)?;
            let (mut v, pass, table) = transform_report(&ps, anchor, &orientation, points, tol_residual)?;
            v["spec"] = json!(label(&ps, &spec.spec));
            if let Some(path) = csv {
                std::fs::write(&path, table).map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
            }
            finish(v, pass, spec.out.as_ref(), stdout)
        }
        Command::Gallery { action: GalleryAction::List { out } } => finish(gallery_list()?, true, out.as_ref(), stdout),
        Command::Gallery { action: GalleryAction::Run { id, n, set, out } } => {
            let (v, pass) = gallery_run(&id, n, &set)?;
            finish(v, pass, out.as_ref(), stdout)
        }
        Command::AbstractLab { spec, set, zeta, b, n, out } => {
            let ps = spec.as_deref().map(|s| load_spec(s, &set)).transpose()?;
            let zeta = zeta.as_deref().map(parse_complex).transpose()?;
            let bs = match b {
                Some(list) => list.split(',').map(parse_complex).collect::<std::result::Result<Vec<_>, _>>()?,
                None => Vec::new(),
            };
            let (v, pass) = abstract_lab_report(ps.as_ref(), zeta, &bs, n)?;
            finish(v, pass, out.as_ref(), stdout)
        }
    }
}

/// Cap rayon's pool from KINVSL_THREADS (ignored if a pool already exists).
fn configure_threads() -> std::result::Result<(), Failure> {
    match std::env::var("KINVSL_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| input(format!("KINVSL_THREADS must be a positive integer, got {v:?}")))?;
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    let result = configure_threads().and_then(|_| dispatch(cli, stdout));
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
