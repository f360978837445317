// Smallest eigenvalues of discretized extensions: the Friedrichs extension
// of the half-line Schrödinger example stays above μ/4 while its Krein
// extension carries a zero mode that the discretization resolves at first order.

use kinvsl::gallery;
use kinvsl::spectral::{
    discretize, eigen_smallest, krein_zero_mode_check, spectrum_csv, spectrum_table, BoundaryCondition, Truncation,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (problem, _) = gallery::example_3_11(4.0, 3.0, 0.0).build()?;
    let trunc = Truncation::for_problem(&problem);
    let friedrichs: BoundaryCondition = "a=dirichlet,b=cap".parse()?;
    let krein: BoundaryCondition = "a=robin:-1,b=cap".parse()?;

    let dx = discretize(&problem, friedrichs, 1000, trunc)?;
    println!("Friedrichs lambda_1 = {:.6}", eigen_smallest(&dx, 1)?[0].value);
    let check = krein_zero_mode_check(&problem, krein, 500, trunc)?;
    for (n, lam) in &check.lambdas {
        println!("Krein N = {n}: lambda_1 = {lam:.3e}");
    }
    println!("first-order decrease: {}, boundary residual {:.1e}", check.first_order, check.boundary_residual);

    let rows = spectrum_table(&problem, friedrichs, &[500, 1000], trunc, 3)?;
    print!("{}", spectrum_csv(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
