//! Sturm–Liouville ODE engine: τ, solutions of τy = zy in quasi-derivative
//! form, Wronskians, endpoint classification and the kernel of the maximal
//! operator.

mod classify;
mod kernel;
mod solve;

pub use classify::{
    anchor, classify_endpoint, endpoint, l2_trend, shell_trend, EndpointClass, EndpointKind, Side, Trend,
    INFINITE_STEPS, SHELL_LEVELS,
};
pub use kernel::{
    computational_end, image_solution_residual, k_eigenvalue_on_kernel, kernel_basis, middle_sample, zeta_on,
    KernelBasis, KernelSolution, ZetaEstimate, KERNEL_RTOL, KERNEL_TRUNCATION,
};
pub use solve::{solve_tau, solve_tau_lenient, solve_tau_with, wronskian, SolutionFn, BLOW_UP};

use crate::funcalg::ExprFn;
use crate::ktransform::SLProblem;

/// Exact symbolic τf.
pub fn tau_apply(problem: &SLProblem, f: &ExprFn) -> ExprFn {
    problem.tau(f)
}
