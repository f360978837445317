// Liouville–Green transformation of the power family (n = 1) to the
// half-line Schrödinger operator, together with the transformed K.

use kinvsl::gallery;
use kinvsl::lgtransform::{lg_build_oriented, lg_transform_k, Orientation};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (mu, gamma, c) = (4.0, 1.0, 3.0);
    let (problem, k) = gallery::example_3_10(1, mu, gamma, c).build()?;
    // ξ runs from +∞ at x = 0 down to 0 at x = 1.
    let map = lg_build_oriented(&problem, Some(1.0), Orientation::Decreasing)?;
    let t = lg_transform_k(&problem, &k, &map)?;
    println!("xi range ({:.6}, {:.6}), residuals {:?}", map.cal_a.abs(), map.cal_b, t.residuals);

    let s = mu.sqrt();
    for xi in [0.1, 0.5, 1.0, 3.0] {
        let v = t.potential_at(xi)?;
        let want = gamma / (1.0 - (-s * xi).exp()).powi(2) + mu / 4.0;
        let a_want = (1.0 + c * (-s * xi).exp()).sqrt();
        println!("xi = {xi}: V = {v:.12} (closed form {want:.12}), A~ = {:.12} (closed form {a_want:.12})", t.a_tilde(xi)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
