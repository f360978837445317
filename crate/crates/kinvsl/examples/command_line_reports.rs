// The reports behind the command line, called as library functions.

use kinvsl::cli::{classify_report, gallery_run, report::render, spectrum_rows, verify_report};
use kinvsl::gallery;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = gallery::example_3_9(1.0, 3.0);
    let fail = |f: kinvsl::cli::Failure| f.message;
    let (verify, pass) = verify_report(&spec, 1000, 1e-10, 1e-5).map_err(fail)?;
    println!("verify passed: {pass}");
    print!("{}", render(&verify["coefficient_residuals"]));
    let (classify, _) = classify_report(&spec).map_err(fail)?;
    print!("{}", render(&classify["summary"]));
    let (csv, _) = spectrum_rows(&spec, "a=cap,b=neumann", &[400], None, 3, 1e-6).map_err(fail)?;
    print!("{csv}");
    let (run, pass) = gallery_run("remark_3_6_power", Some(2), &[]).map_err(fail)?;
    println!("generated p = {}, passes verify: {pass}", run["spec"]["p"]);
    println!("{} gallery entries", gallery::list()?.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
