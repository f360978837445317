// Which separated and coupled boundary conditions K leaves invariant.

use kinvsl::extensions::{boundary_transform, classify_invariant_extensions, coupled_invariance, separated_invariance};
use kinvsl::gallery;
use kinvsl::slcore::Side;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for spec in [gallery::example_2_8(2.0), gallery::example_3_9(1.0, 3.0), gallery::example_3_11(4.0, 3.0, 0.0)] {
        let id = spec.gallery_id.clone().unwrap_or_default();
        let (problem, k) = spec.build()?;
        let report = classify_invariant_extensions(&problem, &k)?;
        let krein = report.krein.as_ref().map(|t| format!("{} (angle {:.12})", t.condition.name, t.condition.angle));
        println!("{id}: Friedrichs = {}, Krein = {}", report.friedrichs, krein.unwrap_or_else(|| "untagged".into()));
        for end in [&report.a, &report.b] {
            if let Some(angles) = &end.invariant_angles {
                let names: Vec<String> = angles.iter().map(|a| format!("{} {:.6}", a.name, a.angle)).collect();
                println!("    {:?}: {}", end.class.side, names.join(", "));
            }
        }
    }

    // Example 3.11: the Robin condition cot α = 1 is invariant, α = π/3 is not.
    let (problem, k) = gallery::example_3_11(4.0, 3.0, 0.0).build()?;
    let m = boundary_transform(&problem, &k, Side::A)?;
    println!("M_0 = {:?}", m.matrix);
    for angle in [std::f64::consts::FRAC_PI_4, std::f64::consts::PI / 3.0] {
        let t = separated_invariance(&m, angle);
        println!("alpha = {angle:.6}: invariant = {}", t.eigenvector_form);
    }

    // Coupled conditions need intertwining matrices at the two ends.
    let (problem, k) = kinvsl::problem::ProblemSpec::from_json(
        r#"{"interval": [0, 1], "p": "1", "q": "0", "r": "1", "K": {"A": "1", "phi": "x", "C": 1}}"#,
    )?
    .build()?;
    let ma = boundary_transform(&problem, &k, Side::A)?;
    let mb = boundary_transform(&problem, &k, Side::B)?;
    let periodic = coupled_invariance(&ma, &mb, &[[1.0, 0.0], [0.0, 1.0]])?;
    println!("identity K, periodic condition: intertwining = {}", periodic.intertwining);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
