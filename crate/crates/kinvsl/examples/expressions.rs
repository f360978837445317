// Parse a coefficient, differentiate it symbolically and compose it with a map.

use kinvsl::funcalg::{ExprFn, Interval, Params};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dom = Interval::new(0.0, 1.0)?;
    let mut params = Params::new();
    params.insert("mu".into(), 2.0);
    params.insert("c".into(), 3.0);

    let p = ExprFn::parse("mu*x^2", &params, dom)?;
    let phi = ExprFn::parse("(1+c)*x/(1+c*x)", &params, dom)?;
    let dp = p.derivative();
    let p_of_phi = p.compose(&phi);

    println!("p        = {p}");
    println!("p'       = {dp}");
    println!("p(phi)   = {p_of_phi}");
    println!("phi'     = {}", phi.derivative());
    for x in [0.25, 0.5, 0.75] {
        let fd = (p.eval(x + 1e-6) - p.eval(x - 1e-6)) / 2e-6;
        println!("x = {x}: p' = {:.10}, central difference = {fd:.10}", dp.eval(x));
        assert!((dp.eval(x) - fd).abs() < 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
