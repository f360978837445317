// Check that (p, q, r) and (A, φ) satisfy the coefficient equations and
// that K*τK = τ holds on smooth bumps, for every bundled example.

use kinvsl::gallery;
use kinvsl::ktransform::{residual_coefficient_eqs, residual_operator_identity, standard_bumps};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<22} {:>10} {:>10} {:>10} {:>12}", "entry", "res_r", "res_p", "res_q", "K*tauK-tau");
    for entry in gallery::list()? {
        let (problem, k) = entry.spec.build()?;
        let grid = problem.sample_grid(1000)?;
        let res = residual_coefficient_eqs(&problem, &k, &grid)?;
        let worst = standard_bumps(&problem)?
            .iter()
            .map(|f| residual_operator_identity(&problem, &k, f))
            .collect::<kinvsl::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("{:<22} {:>10.2e} {:>10.2e} {:>10.2e} {:>12.2e}", entry.id, res.res_r, res.res_p, res.res_q, worst);
        assert!(res.max() <= 1e-10 && worst <= 1e-5);
    }

    // A perturbed potential breaks the q equation.
    let bad = gallery::example_3_9(1.0, 3.0);
    let mut bad = bad;
    bad.q = "0.01*x".into();
    let (problem, k) = bad.build()?;
    let res = residual_coefficient_eqs(&problem, &k, &problem.sample_grid(1000)?)?;
    println!("perturbed q: res_q = {:.3e}", res.res_q);
    assert!(res.res_q > 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
