//! Every example runs to completion.

#[allow(dead_code)]
mod expressions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/expressions.rs"));
}

#[allow(dead_code)]
mod coefficient_equations {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/coefficient_equations.rs"));
}

#[allow(dead_code)]
mod schroeder_families {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/schroeder_families.rs"));
}

#[allow(dead_code)]
mod endpoint_classification {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/endpoint_classification.rs"));
}

#[allow(dead_code)]
mod invariant_boundary_conditions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/invariant_boundary_conditions.rs"));
}

#[allow(dead_code)]
mod liouville_green {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/liouville_green.rs"));
}

#[allow(dead_code)]
mod krein_spectrum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/krein_spectrum.rs"));
}

#[allow(dead_code)]
mod abstract_extensions {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/abstract_extensions.rs"));
}

#[allow(dead_code)]
mod block_operator {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/block_operator.rs"));
}

#[allow(dead_code)]
mod command_line_reports {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/command_line_reports.rs"));
}

#[test]
fn expressions_runs() {
    expressions::run_example().unwrap();
}

#[test]
fn coefficient_equations_runs() {
    coefficient_equations::run_example().unwrap();
}

#[test]
fn schroeder_families_runs() {
    schroeder_families::run_example().unwrap();
}

#[test]
fn endpoint_classification_runs() {
    endpoint_classification::run_example().unwrap();
}

#[test]
fn invariant_boundary_conditions_runs() {
    invariant_boundary_conditions::run_example().unwrap();
}

#[test]
fn liouville_green_runs() {
    liouville_green::run_example().unwrap();
}

#[test]
fn krein_spectrum_runs() {
    krein_spectrum::run_example().unwrap();
}

#[test]
fn abstract_extensions_runs() {
    abstract_extensions::run_example().unwrap();
}

#[test]
fn block_operator_runs() {
    block_operator::run_example().unwrap();
}

#[test]
fn command_line_reports_runs() {
    command_line_reports::run_example().unwrap();
}
