// The 2x2 block operator with 𝐊(f, g) = (K_c g, K_d f): four invariant
// extensions and the boundary conditions of the two mixed ones.

use kinvsl::bkvglab::{
    block_boundary_transform, block_condition_display, block_condition_from_domain, block_condition_residual,
    build_block_model, enumerate_invariant_extensions, row_space_distance,
};
use kinvsl::gallery;
use kinvsl::slcore::Side;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (c, d) = (1.0, 3.0);
    let model = build_block_model(c, d, |s| gallery::example_3_9(1.0, s), 1000)?;
    println!("K on the kernel:\n{:.10}", model.k_tilde.map(|z| z.re));
    let e = enumerate_invariant_extensions(&model.k_tilde)?;
    for r in &e.root_spaces {
        println!("zeta = {:+.12}", r.zeta.re);
    }
    println!("{} extensions: {:?}", e.extensions.len(), e.labels());

    let (pb, kc) = gallery::example_3_9(1.0, c).build()?;
    let (_, kd) = gallery::example_3_9(1.0, d).build()?;
    let big = block_boundary_transform(&pb, &kc, &kd, Side::B)?;
    let (a_c, a_d) = ((1.0 + c).sqrt(), (1.0 + d).sqrt());
    for (ext, sign) in e.extensions[1..3].iter().zip([1.0, -1.0]) {
        let got = block_condition_from_domain(&model, &ext.aux, Side::B)?;
        let want = block_condition_display(a_c, a_d, sign);
        println!(
            "{}: distance to the displayed condition {:.1e}, invariance residual {:.1e}",
            ext.label,
            row_space_distance(&want, &got),
            block_condition_residual(&got, &big)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
