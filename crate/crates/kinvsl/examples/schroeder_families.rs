// Solutions of Schröder's equation generate new K-invariant coefficients:
// powers of the seed P = μ⁻¹(x⁻¹ − 1) and its periodic modulations.

use kinvsl::funcalg::{ExprFn, Params};
use kinvsl::gallery::{self, EXAMPLE_3_9_SEED};
use kinvsl::schroeder::{family_periodic, family_power, koenigs, orientations, seed, verify_schroeder};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = gallery::example_3_9(1.0, 1.0);
    let (problem, k) = spec.build()?;
    let anti = ExprFn::parse(EXAMPLE_3_9_SEED, &spec.params, problem.interval)?;
    let grid = problem.sample_grid(400)?;
    let (grow, shrink) = orientations(&anti, &k, 2f64.sqrt(), &grid);
    println!("P(phi^-1 x) = A^2 P(x): {grow:.2e}   P(phi^-1 x) = A^-2 P(x): {shrink:.2e}");

    let s = seed(&problem, &k, anti, Some(1.0))?;
    for n in 1..=3 {
        let fam = family_power(&s, n)?;
        println!("n = {n}: A = {:.6}, p = {}, worst residual {:.2e}", fam.a, fam.p, fam.residuals.max());
    }
    let g = ExprFn::parse("12+sin(2*pi*x/ln(2))", &Params::new(), problem.interval)?;
    let fam = family_periodic(&s, &g)?;
    println!("periodic modulation: worst residual {:.2e}", fam.residuals.max());

    // Koenigs linearization of φ at its attracting fixed point 1.
    let sigma = koenigs(&k.phi, 1.0, 200)?;
    let near: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.2).collect();
    let res = verify_schroeder(&sigma, &k.phi, sigma.multiplier(), &near);
    println!("Koenigs: multiplier {:.6}, residual {res:.2e}", sigma.multiplier());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
