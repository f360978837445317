// Extensions labelled by an auxiliary operator B on the kernel: the
// defect-one dichotomy and a domain vector recovering the Neumann condition.

use kinvsl::bkvglab::{
    bkvg_domain_vector, build_scalar_model, check_invariance_condition, enumerate_invariant_extensions,
    AuxiliaryOperator, CMat, Complex,
};
use kinvsl::gallery;
use kinvsl::slcore::Side;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (problem, k) = gallery::example_3_9(1.0, 3.0).build()?;
    let model = build_scalar_model(&problem, &k, 1000)?;
    println!("K on the kernel: {:.10}, off-span residual {:.1e}", model.k_tilde[(0, 0)].re, model.off_span);
    let e = enumerate_invariant_extensions(&model.k_tilde)?;
    println!("invariant extensions: {:?}", e.labels());

    let bs = [Complex::new(0.0, 0.0), Complex::new(0.5, 0.0), Complex::new(1.0, 0.0), Complex::new(0.0, 1.0), Complex::new(1.0, 1.0)];
    let rotation = CMat::from_element(1, 1, Complex::from_polar(1.0, 0.7));
    for b in bs {
        let aux = AuxiliaryOperator::scalar(b);
        println!(
            "b = {b}: zeta = 2 -> {}, |zeta| = 1 -> {}",
            check_invariance_condition(&aux, &model.k_tilde).pass,
            check_invariance_condition(&aux, &rotation).pass
        );
    }

    let one = [Complex::new(1.0, 0.0)];
    let zero = [Complex::new(0.0, 0.0)];
    let v = bkvg_domain_vector(&model, &AuxiliaryOperator::krein(1), &one, &zero)?;
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let (value, quasi) = model.boundary_data(&re, Side::B)[0];
    println!("Krein domain vector at x = 1: g = {value:.6}, g^[1] = {quasi:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
