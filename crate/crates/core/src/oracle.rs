//! Objective-function interface: value, gradient and Hessian action on a
//! block of directions, plus finite-difference verification.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm, DenseMatrix, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("non-finite {what} encountered during derivative check")]
    NonFiniteValue { what: &'static str },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
}

/// A twice-differentiable objective.
///
/// `value` may return `+∞` (or any non-finite value) to mark points outside
/// the function's domain; line searches treat that as a rejected trial.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// `G(x)·V` for every column of `V` in one call.
    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix;

    /// The dense Hessian, when an implementation can provide it cheaply.
    fn hessian(&self, _x: &[f64]) -> Option<SymMatrix> {
        None
    }

    fn hess_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let block = DenseMatrix::from_columns(&[v]).expect("single column");
        self.hess_action(x, &block).col(0).to_vec()
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(x)
    }
    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        (**self).hess_action(x, v)
    }
    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        (**self).hessian(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(x)
    }
    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        (**self).hess_action(x, v)
    }
    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        (**self).hessian(x)
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VecFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HessVecFn = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Objective assembled from closures. The Hessian action is applied column by column.
pub struct FnObjective {
    dim: usize,
    f: ValueFn,
    grad: VecFn,
    hess_vec: HessVecFn,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hess_vec: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            f: Box::new(f),
            grad: Box::new(grad),
            hess_vec: Box::new(hess_vec),
        }
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }
    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        let cols: Vec<Vec<f64>> = v.columns().map(|c| (self.hess_vec)(x, c)).collect();
        if cols.is_empty() {
            return DenseMatrix::zeros(self.dim, 0);
        }
        DenseMatrix::from_columns(&cols).expect("hess_vec returned a ragged block")
    }
}

/// Evaluation counts accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    pub n_f: usize,
    pub n_grad: usize,
    pub n_hess_action_cols: usize,
}

/// Wraps an objective and counts every evaluation. Counting is atomic so a
/// shared wrapper stays valid under concurrent evaluation.
pub struct Counted<O> {
    inner: O,
    n_f: AtomicUsize,
    n_grad: AtomicUsize,
    n_hess_cols: AtomicUsize,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            n_f: AtomicUsize::new(0),
            n_grad: AtomicUsize::new(0),
            n_hess_cols: AtomicUsize::new(0),
        }
    }

    pub fn counters(&self) -> EvalCounters {
        EvalCounters {
            n_f: self.n_f.load(Ordering::Relaxed),
            n_grad: self.n_grad.load(Ordering::Relaxed),
            n_hess_action_cols: self.n_hess_cols.load(Ordering::Relaxed),
        }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.n_f.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.n_grad.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.n_f.fetch_add(1, Ordering::Relaxed);
        self.n_grad.fetch_add(1, Ordering::Relaxed);
        self.inner.value_and_gradient(x)
    }
    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        self.n_hess_cols.fetch_add(v.cols(), Ordering::Relaxed);
        self.inner.hess_action(x, v)
    }
    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        self.inner.hessian(x)
    }
}

/// Default central-difference step `1e-5·(1 + ‖x‖)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + norm(x))
}

fn check_inputs(oracle: &dyn Objective, x: &[f64], h: f64) -> Result<(), OracleError> {
    if x.len() != oracle.dim() {
        return Err(OracleError::DimensionMismatch {
            expected: oracle.dim(),
            found: x.len(),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(OracleError::BadStep(h));
    }
    Ok(())
}

/// Compares the analytic gradient with central differences of `f`.
///
/// Returns `max_i |g_i − ĝ_i| / max(1, |g_i|)`.
pub fn check_gradient(oracle: &dyn Objective, x: &[f64], h: f64) -> Result<f64, OracleError> {
    check_inputs(oracle, x, h)?;
    let g = oracle.gradient(x);
    if !g.iter().all(|v| v.is_finite()) {
        return Err(OracleError::NonFiniteValue { what: "gradient" });
    }
    let mut xp = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = oracle.value(&xp);
        xp[i] = x[i] - h;
        let fm = oracle.value(&xp);
        xp[i] = x[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(OracleError::NonFiniteValue { what: "function value" });
        }
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1.0));
    }
    Ok(worst)
}

/// Compares `G(x)v` with `(g(x+hv) − g(x−hv)) / 2h`.
///
/// Returns `‖Gv − d‖ / max(1, ‖d‖)`; `v = 0` yields exactly zero.
pub fn check_hess_action(
    oracle: &dyn Objective,
    x: &[f64],
    v: &[f64],
    h: f64,
) -> Result<f64, OracleError> {
    check_inputs(oracle, x, h)?;
    if v.len() != x.len() {
        return Err(OracleError::DimensionMismatch {
            expected: x.len(),
            found: v.len(),
        });
    }
    let gv = oracle.hess_vec(x, v);
    if !gv.iter().all(|t| t.is_finite()) {
        return Err(OracleError::NonFiniteValue { what: "Hessian action" });
    }
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let gp = oracle.gradient(&xp);
    let gm = oracle.gradient(&xm);
    if !(gp.iter().chain(&gm).all(|t| t.is_finite())) {
        return Err(OracleError::NonFiniteValue { what: "gradient" });
    }
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let diff: Vec<f64> = gv.iter().zip(&fd).map(|(a, b)| a - b).collect();
    Ok(norm(&diff) / norm(&fd).max(1.0))
}
