// Limit-point / limit-circle classification, the kernel of τ and the
// eigenvalue of K on it.

use kinvsl::gallery;
use kinvsl::slcore::{classify_endpoint, k_eigenvalue_on_kernel, kernel_basis, wronskian, Side};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for spec in [gallery::example_3_9(1.0, 3.0), gallery::example_3_10(2, 1.0, 1.0, 1.0), gallery::example_3_11(4.0, 3.0, 0.0)] {
        let id = spec.gallery_id.clone().unwrap_or_default();
        let (problem, k) = spec.build()?;
        let a = classify_endpoint(&problem, Side::A)?;
        let b = classify_endpoint(&problem, Side::B)?;
        let basis = kernel_basis(&problem)?;
        let zeta = k_eigenvalue_on_kernel(&problem, &k)?;
        println!("{id}: a {:?}, b {:?}, dim ker = {}, zeta = {:.12} (spread {:.1e})", a.kind, b.kind, basis.dimension, zeta.zeta, zeta.spread);
    }
    // Example 3.10 with n = 2, γ = μ: ζ = 2^{√5}.
    let (problem, k) = gallery::example_3_10(2, 1.0, 1.0, 1.0).build()?;
    let zeta = k_eigenvalue_on_kernel(&problem, &k)?.zeta;
    println!("2^sqrt(5) = {:.12}, computed {zeta:.12}", 2f64.powf(5f64.sqrt()));

    // Two candidate solutions at a regular pair of ends have a constant Wronskian.
    let (problem, _) = gallery::example_3_9(1.0, 3.0).build()?;
    let u = kinvsl::slcore::solve_tau(&problem, 0.0, 0.5, (1.0, 0.0), 0.1, 0.9)?;
    let v = kinvsl::slcore::solve_tau(&problem, 0.0, 0.5, (0.0, 1.0), 0.1, 0.9)?;
    for x in [0.1, 0.5, 0.9] {
        println!("W(u, v)({x}) = {:.15}", wronskian(&u, &v, x)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
