use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg} (expected one of: {})", expected.join(", "))]
    Syntax {
        pos: usize,
        msg: String,
        expected: Vec<String>,
    },
    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },
    #[error("root finding: no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{what}: iteration limit {limit} exceeded")]
    MaxIterations { what: &'static str, limit: usize },
    #[error("evaluation at x = {x} is outside the domain or undefined")]
    OutsideDomain { x: f64 },
    #[error("integration step underflow at x = {reached}")]
    StepUnderflow { reached: f64 },
    #[error("classification of endpoint {endpoint} is inconclusive: {detail}")]
    Inconclusive { endpoint: f64, detail: String },
    #[error("kernel has dimension {found}, expected {expected}")]
    KernelDimension { found: usize, expected: usize },
    #[error("K does not preserve the kernel: ratio spread {spread:e} relative to {zeta}")]
    NonConstantRatio { zeta: f64, spread: f64 },
    #[error("boundary limit at {endpoint} diverges")]
    DivergentLimit { endpoint: f64 },
    #[error("fixed point {point} is not attracting (|phi'| = {slope})")]
    NotAttracting { point: f64, slope: f64 },
    #[error("generated coefficient changes sign near x = {x}")]
    SignChange { x: f64 },
    #[error("1/p is not integrable at {endpoint}")]
    NotIntegrable { endpoint: f64 },
    #[error("p*r vanishes or is not positive near x = {x}")]
    DegenerateWeight { x: f64 },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
