use blockbfgs::oracle::Objective;
use blockbfgs::solvers::{solve, Method, SolverConfig, Termination};

use crate::BenchError;

/// Near-optimal objective value and the threshold derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FStop {
    pub f_star: f64,
    pub f_stop: f64,
    pub reference_steps: usize,
    pub termination: Termination,
}

/// Classical BFGS run to `‖g‖ ≤ 1e-9` with a 50000-step budget.
pub fn reference_config() -> SolverConfig {
    SolverConfig::new(Method::Bfgs).with_grad_tol(1e-9).with_max_steps(50_000)
}

/// `f* + 0.01|f*|`, or `f* + 1e-10` when `|f*| < 1e-10`.
pub fn fstop_from_optimum(f_star: f64) -> f64 {
    if f_star.abs() < 1e-10 {
        f_star + 1e-10
    } else {
        f_star + 0.01 * f_star.abs()
    }
}

/// Runs the reference solver from `x0` and derives `f_stop` from its best value.
pub fn compute_fstop(oracle: &dyn Objective, x0: &[f64], reference: &SolverConfig) -> Result<FStop, BenchError> {
    let trace = solve(oracle, x0, reference).map_err(|e| BenchError::ReferenceFailed(e.to_string()))?;
    let f_star = trace.f_history().filter(|f| f.is_finite()).fold(f64::INFINITY, f64::min);
    let converged_at_start = trace.termination == Termination::GradTol && trace.steps() == 0;
    if !f_star.is_finite() || (f_star >= trace.f_initial && !converged_at_start) {
        return Err(BenchError::ReferenceFailed(format!(
            "{:?} after {} steps with f = {:e}",
            trace.termination,
            trace.steps(),
            trace.f_final
        )));
    }
    Ok(FStop {
        f_star,
        f_stop: fstop_from_optimum(f_star),
        reference_steps: trace.steps(),
        termination: trace.termination,
    })
}
