use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use blockbfgs::linalg::norm;
use blockbfgs::oracle::{check_gradient, check_hess_action, default_fd_step};
use blockbfgs::problems::SuiteProblem;

/// Largest accepted gradient discrepancy against central differences.
pub const GRADIENT_CHECK_TOL: f64 = 1e-5;
/// Largest accepted Hessian-action discrepancy against differenced gradients.
pub const HESS_ACTION_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub problem: String,
    pub points: usize,
    pub gradient_error: f64,
    pub hess_action_error: f64,
    pub error: Option<String>,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.gradient_error <= GRADIENT_CHECK_TOL
            && self.hess_action_error <= HESS_ACTION_CHECK_TOL
    }
}

/// Finite-difference checks at the starting point and at a nearby random
/// point, along a random unit direction.
pub fn derivative_check(problem: &SuiteProblem, seed: u64) -> DerivativeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.x0.len();
    let mut report = DerivativeReport {
        problem: problem.name.clone(),
        points: 0,
        gradient_error: 0.0,
        hess_action_error: 0.0,
        error: None,
    };
    let oracle = problem.oracle.as_ref();
    let nearby: Vec<f64> = problem.x0.iter().map(|x| x + 0.01 * rng.random_range(-1.0..1.0)).collect();
    let mut points = vec![problem.x0.clone()];
    if oracle.value(&nearby).is_finite() {
        points.push(nearby);
    }
    for x in &points {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let vn = norm(&v).max(f64::MIN_POSITIVE);
        v.iter_mut().for_each(|t| *t /= vn);
        let h = default_fd_step(x);
        let checked = check_gradient(oracle, x, h).and_then(|g| Ok((g, check_hess_action(oracle, x, &v, h)?)));
        match checked {
            Ok((g, hv)) => {
                report.gradient_error = report.gradient_error.max(g);
                report.hess_action_error = report.hess_action_error.max(hv);
                report.points += 1;
            }
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        }
    }
    report
}
