//! Inexact Armijo–Wolfe line search.
//!
//! The unit step is always tried first and returned whenever it satisfies
//! both conditions. Otherwise the search expands while the step is too short
//! and, once a bracket exists, zooms with safeguarded cubic interpolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::dot;
use crate::tol;
use crate::oracle::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSearchParams {
    /// Sufficient-decrease parameter, `0 < alpha < 1/2`.
    pub alpha: f64,
    /// Curvature parameter, `alpha < beta < 1`.
    pub beta: f64,
    pub max_evals: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.75,
            max_evals: 50,
            lambda_min: 1e-20,
            lambda_max: 1e10,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        let ok = self.alpha > 0.0
            && self.alpha < 0.5
            && self.beta > self.alpha
            && self.beta < 1.0
            && self.max_evals >= 1
            && self.lambda_min > 0.0
            && self.lambda_max >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(LineSearchError::InvalidParams(*self))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineSearchStatus {
    Converged,
    MaxEvals,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub lambda: f64,
    pub f_new: f64,
    pub g_new: Vec<f64>,
    pub n_evals: usize,
    pub status: LineSearchStatus,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineSearchError {
    #[error("direction is not a descent direction (slope {0:e})")]
    NotDescent(f64),
    #[error("invalid line search parameters: {0:?}")]
    InvalidParams(LineSearchParams),
}

/// Sufficient decrease: `f(x+λd) ≤ f0 + αλ⟨g0,d⟩`. Non-finite values fail.
pub fn armijo_holds(f0: f64, slope0: f64, lambda: f64, f_new: f64, alpha: f64) -> bool {
    f_new.is_finite() && f_new <= f0 + alpha * lambda * slope0
}

/// Decrease certified from slopes when `f` has stalled at its evaluation
/// noise: `|f(x+λd) − f0| ≤ F_NOISE·|f0|` and `⟨g(x+λd),d⟩ ≤ (2α−1)⟨g0,d⟩`.
///
/// For a quadratic along `d` the slope bound is equivalent to sufficient
/// decrease. Values that differ by more than the noise floor are never
/// overruled, so this only admits steps whose Armijo failure is roundoff.
pub fn noisy_decrease_holds(f0: f64, slope0: f64, f_new: f64, slope_new: f64, alpha: f64) -> bool {
    f_new.is_finite()
        && slope_new.is_finite()
        && (f_new - f0).abs() <= tol::F_NOISE * f0.abs()
        && slope_new <= (2.0 * alpha - 1.0) * slope0
}

/// Curvature: `⟨g(x+λd),d⟩ ≥ β⟨g0,d⟩`.
pub fn wolfe_holds(slope0: f64, slope_new: f64, beta: f64) -> bool {
    slope_new.is_finite() && slope_new >= beta * slope0
}

#[derive(Clone)]
struct Trial {
    lambda: f64,
    f: f64,
    slope: f64,
    g: Vec<f64>,
}

/// Minimizer of the cubic interpolating `(a, fa, da)` and `(b, fb, db)`.
fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    t.is_finite().then_some(t)
}

fn next_in_bracket(lo: &Trial, hi: &Trial) -> f64 {
    let width = hi.lambda - lo.lambda;
    let (left, right) = (lo.lambda + 0.1 * width, lo.lambda + 0.9 * width);
    let (left, right) = if left <= right { (left, right) } else { (right, left) };
    let bisect = lo.lambda + 0.5 * width;
    if !(hi.f.is_finite() && hi.slope.is_finite()) {
        return bisect;
    }
    match cubic_minimizer(lo.lambda, lo.f, lo.slope, hi.lambda, hi.f, hi.slope) {
        Some(t) if t >= left && t <= right => t,
        _ => bisect,
    }
}

/// Finds `λ` satisfying the Armijo–Wolfe conditions along `d` from `x`.
///
/// Sufficient decrease is judged up to the evaluation-noise floor, see
/// [`noisy_decrease_holds`].
///
/// `f0` and `g0` must be the value and gradient at `x`. A budget overrun is
/// reported through [`LineSearchStatus::MaxEvals`] and a collapsed step through
/// [`LineSearchStatus::Failed`]; in both cases the best Armijo-satisfying trial
/// seen so far is returned (or `λ = 0`).
pub fn wolfe_search(
    oracle: &dyn Objective,
    x: &[f64],
    d: &[f64],
    f0: f64,
    g0: &[f64],
    params: &LineSearchParams,
) -> Result<LineSearchResult, LineSearchError> {
    params.validate()?;
    let slope0 = dot(g0, d);
    if !(slope0 < 0.0) {
        return Err(LineSearchError::NotDescent(slope0));
    }
    let mut xt = vec![0.0; x.len()];
    let mut evaluate = |lambda: f64| -> Trial {
        for ((xi, &x0), &di) in xt.iter_mut().zip(x).zip(d) {
            *xi = x0 + lambda * di;
        }
        let (f, g) = oracle.value_and_gradient(&xt);
        let slope = if f.is_finite() { dot(&g, d) } else { f64::NAN };
        Trial { lambda, f, slope, g }
    };

    let mut lo = Trial {
        lambda: 0.0,
        f: f0,
        slope: slope0,
        g: g0.to_vec(),
    };
    let mut hi: Option<Trial> = None;
    let mut lambda = 1.0f64.min(params.lambda_max);
    let mut n_evals = 0;

    let finish = |t: Trial, n_evals: usize, status| LineSearchResult {
        lambda: t.lambda,
        f_new: t.f,
        g_new: t.g,
        n_evals,
        status,
    };

    loop {
        if n_evals >= params.max_evals {
            return Ok(finish(lo, n_evals, LineSearchStatus::MaxEvals));
        }
        let t = evaluate(lambda);
        n_evals += 1;
        let decrease = armijo_holds(f0, slope0, t.lambda, t.f, params.alpha)
            || noisy_decrease_holds(f0, slope0, t.f, t.slope, params.alpha);
        if !decrease {
            hi = Some(t);
        } else if !wolfe_holds(slope0, t.slope, params.beta) {
            lo = t;
        } else {
            return Ok(finish(t, n_evals, LineSearchStatus::Converged));
        }

        lambda = match &hi {
            None => {
                if lo.lambda >= params.lambda_max {
                    return Ok(finish(lo, n_evals, LineSearchStatus::Failed));
                }
                (2.0 * lo.lambda).min(params.lambda_max)
            }
            Some(hi) => next_in_bracket(&lo, hi),
        };
        if let Some(hi) = &hi {
            let width = (hi.lambda - lo.lambda).abs();
            if width < params.lambda_min || width <= f64::EPSILON * hi.lambda.abs() {
                return Ok(finish(lo, n_evals, LineSearchStatus::Failed));
            }
        }
    }
}
