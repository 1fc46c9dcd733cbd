//! Iteration drivers sharing one line search and one trace format.

mod config;
mod trace;

pub use config::{cube_root_floor, Method, SolverConfig};
pub use trace::{BlockRecord, DampingRecord, RunSummary, RunTrace, StepRecord, Termination, TRACE_CSV_HEADER};

use std::time::Instant;

use thiserror::Error;

use crate::linalg::{dot, norm, scaled, sub, DenseMatrix};
use crate::linesearch::{wolfe_search, LineSearchStatus};
use crate::oracle::{Counted, Objective};
use crate::tol;
use crate::updates::{
    all_steps, block_update_inverse, cautious_gate, filter_steps, li_fukushima_modify, powell_damp,
    secant_update, FilterResult, InverseApprox, StepBlock,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("starting point has dimension {found}, objective expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("objective or gradient is not finite at the starting point")]
    NonFiniteStart,
    #[error("solver entry point expects {expected:?}, configuration selects {found:?}")]
    MethodMismatch { expected: Method, found: Method },
}

/// Runs the method selected by `cfg.method`.
pub fn solve(oracle: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<RunTrace, SolverError> {
    match cfg.method {
        Method::BlockBfgs => solve_block_bfgs(oracle, x0, cfg),
        Method::RollingBlockBfgs => solve_rolling_block_bfgs(oracle, x0, cfg),
        Method::Bfgs => solve_bfgs(oracle, x0, cfg),
        _ => solve_variant(oracle, x0, cfg),
    }
}

fn expect_method(cfg: &SolverConfig, allowed: &[Method]) -> Result<(), SolverError> {
    if allowed.contains(&cfg.method) {
        Ok(())
    } else {
        Err(SolverError::MethodMismatch {
            expected: allowed[0],
            found: cfg.method,
        })
    }
}

struct Step {
    s: Vec<f64>,
    y: Vec<f64>,
    lambda: f64,
    g_old: Vec<f64>,
}

/// State shared by every method: current iterate, records, counters.
struct Driver<'a> {
    oracle: Counted<&'a dyn Objective>,
    cfg: &'a SolverConfig,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    records: Vec<StepRecord>,
    blocks: Vec<BlockRecord>,
    f_initial: f64,
    gnorm_initial: f64,
    resets: usize,
    iterates: Vec<Vec<f64>>,
    start: Instant,
}

impl<'a> Driver<'a> {
    fn new(oracle: &'a dyn Objective, x0: &[f64], cfg: &'a SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        if x0.len() != oracle.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: oracle.dim(),
                found: x0.len(),
            });
        }
        let start = Instant::now();
        let oracle = Counted::new(oracle);
        let (f, g) = oracle.value_and_gradient(x0);
        if !f.is_finite() || !g.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFiniteStart);
        }
        let gnorm = norm(&g);
        Ok(Self {
            oracle,
            cfg,
            x: x0.to_vec(),
            f,
            g,
            records: Vec::new(),
            blocks: Vec::new(),
            f_initial: f,
            gnorm_initial: gnorm,
            resets: 0,
            iterates: if cfg.record_iterates { vec![x0.to_vec()] } else { Vec::new() },
            start,
        })
    }

    fn n(&self) -> usize {
        self.x.len()
    }

    /// Convergence tests, then the step budget.
    fn stop_reason(&self) -> Option<Termination> {
        if norm(&self.g) <= self.cfg.grad_tol {
            return Some(Termination::GradTol);
        }
        if let Some(fs) = self.cfg.f_stop {
            if self.f <= fs {
                return Some(Termination::FStop);
            }
        }
        if self.records.len() >= self.cfg.max_steps {
            return Some(Termination::MaxSteps);
        }
        None
    }

    /// `−Hg`, resetting `H` to the initial scaling if that is not a descent direction.
    fn direction(&mut self, h: &mut InverseApprox) -> Vec<f64> {
        let d = h.direction(&self.g);
        if dot(&d, &self.g) < 0.0 && d.iter().all(|v| v.is_finite()) {
            return d;
        }
        self.resets += 1;
        *h = InverseApprox::scaled_identity(self.n(), self.cfg.h0_scale);
        h.direction(&self.g)
    }

    fn take_step(&mut self, d: &[f64], k: usize, i: usize) -> Result<Step, Termination> {
        let ls = wolfe_search(&self.oracle, &self.x, d, self.f, &self.g, &self.cfg.ls)
            .map_err(|_| Termination::LineSearchFail)?;
        if ls.status != LineSearchStatus::Converged {
            return Err(Termination::LineSearchFail);
        }
        if !ls.g_new.iter().all(|v| v.is_finite()) {
            return Err(Termination::NonFiniteValue);
        }
        let s = scaled(ls.lambda, d);
        let y = sub(&ls.g_new, &self.g);
        let gnorm_old = norm(&self.g);
        let snorm = norm(&s);
        let cos_theta = if gnorm_old > 0.0 && snorm > 0.0 {
            (-dot(&self.g, &s) / (gnorm_old * snorm)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for (xi, si) in self.x.iter_mut().zip(&s) {
            *xi += si;
        }
        if self.cfg.record_iterates {
            self.iterates.push(self.x.clone());
        }
        let g_old = std::mem::replace(&mut self.g, ls.g_new);
        self.f = ls.f_new;
        self.records.push(StepRecord {
            step: self.records.len() + 1,
            k,
            i,
            f: self.f,
            gnorm: norm(&self.g),
            lambda: ls.lambda,
            snorm,
            cos_theta,
            updated: false,
            qk: 0,
            elapsed: self.start.elapsed().as_secs_f64(),
            damping: None,
        });
        Ok(Step {
            s,
            y,
            lambda: ls.lambda,
            g_old,
        })
    }

    fn mark_update(&mut self, qk: usize) {
        if let Some(r) = self.records.last_mut() {
            r.updated = true;
            r.qk = qk;
        }
    }

    fn finish(self, termination: Termination) -> RunTrace {
        RunTrace {
            method: self.cfg.method.name().to_string(),
            counters: self.oracle.counters(),
            wall_time: self.start.elapsed().as_secs_f64(),
            termination,
            f_initial: self.f_initial,
            gnorm_initial: self.gnorm_initial,
            gnorm_final: norm(&self.g),
            f_final: self.f,
            x_final: self.x,
            records: self.records,
            blocks: self.blocks,
            resets: self.resets,
            iterates: self.iterates,
        }
    }
}

/// Applies the block update for a filtered (or unfiltered) set of directions.
/// Returns the number of directions used, or `None` when the update was skipped.
fn apply_block_update(h: &mut InverseApprox, filt: &FilterResult) -> Option<usize> {
    if filt.is_empty() {
        return None;
    }
    match block_update_inverse(h, filt) {
        Ok(next) if next.matrix().is_finite() => {
            *h = next;
            Some(filt.len())
        }
        _ => None,
    }
}

/// Block BFGS: up to `q` steps with a fixed `H`, then one block update from
/// the Hessian action at the block's final point.
///
/// If a stopping test fires inside a block, the run ends without updating on
/// the partial block.
pub fn solve_block_bfgs(oracle: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<RunTrace, SolverError> {
    expect_method(cfg, &[Method::BlockBfgs])?;
    let mut drv = Driver::new(oracle, x0, cfg)?;
    let n = drv.n();
    let q = cfg.block_size(n);
    let mut h = InverseApprox::scaled_identity(n, cfg.h0_scale);

    for k in 1.. {
        let mut steps: Vec<Vec<f64>> = Vec::with_capacity(q);
        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(q);
        for i in 1..=q {
            if let Some(t) = drv.stop_reason() {
                return Ok(drv.finish(t));
            }
            let d = drv.direction(&mut h);
            match drv.take_step(&d, k, i) {
                Ok(step) => {
                    steps.push(step.s);
                    grads.push(step.g_old);
                }
                Err(t) => return Ok(drv.finish(t)),
            }
        }
        if let Some(t) = drv.stop_reason() {
            return Ok(drv.finish(t));
        }

        let s_cols = DenseMatrix::from_columns(&steps).expect("steps share the dimension");
        let gs_cols = drv.oracle.hess_action(&drv.x, &s_cols);
        if !gs_cols.is_finite() {
            return Ok(drv.finish(Termination::NonFiniteValue));
        }
        let block = StepBlock {
            g_cols: DenseMatrix::from_columns(&grads).expect("gradients share the dimension"),
            s_cols,
            gs_cols,
            block_index: k,
        };
        let filt = if cfg.filter {
            filter_steps(&block, cfg.tau, cfg.always_keep_first)
        } else {
            all_steps(&block)
        };
        let used = apply_block_update(&mut h, &filt);
        if let Some(qk) = used {
            drv.mark_update(qk);
        }
        drv.blocks.push(BlockRecord {
            k,
            evaluated_cols: block.len(),
            kept: filt.len(),
            updated: used.is_some(),
        });
    }
    unreachable!("block loop only exits by returning")
}

/// Rolling Block BFGS: a block update after every step, over a window of at
/// most `q` recent steps with the newest first.
///
/// The Hessian action of the whole window is re-evaluated at the current
/// point each step. With filtering on, the window carried forward is the
/// filtered set.
pub fn solve_rolling_block_bfgs(
    oracle: &dyn Objective,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<RunTrace, SolverError> {
    expect_method(cfg, &[Method::RollingBlockBfgs])?;
    let mut drv = Driver::new(oracle, x0, cfg)?;
    let n = drv.n();
    let q = cfg.block_size(n);
    let mut h = InverseApprox::scaled_identity(n, cfg.h0_scale);
    // (step number, step vector), newest first.
    let mut window: Vec<(usize, Vec<f64>)> = Vec::with_capacity(q);

    for k in 1.. {
        if let Some(t) = drv.stop_reason() {
            return Ok(drv.finish(t));
        }
        let d = drv.direction(&mut h);
        let step = match drv.take_step(&d, k, 1) {
            Ok(step) => step,
            Err(t) => return Ok(drv.finish(t)),
        };
        window.retain(|(j, _)| j + q > k);
        window.insert(0, (k, step.s));
        debug_assert!(window.len() <= q);
        if let Some(t) = drv.stop_reason() {
            return Ok(drv.finish(t));
        }

        let cols: Vec<&[f64]> = window.iter().map(|(_, s)| s.as_slice()).collect();
        let s_cols = DenseMatrix::from_columns(&cols).expect("steps share the dimension");
        let gs_cols = drv.oracle.hess_action(&drv.x, &s_cols);
        if !gs_cols.is_finite() {
            return Ok(drv.finish(Termination::NonFiniteValue));
        }
        let block = StepBlock {
            g_cols: DenseMatrix::zeros(n, 0),
            s_cols,
            gs_cols,
            block_index: k,
        };
        let filt = if cfg.filter {
            filter_steps(&block, cfg.tau, cfg.always_keep_first)
        } else {
            all_steps(&block)
        };
        let used = apply_block_update(&mut h, &filt);
        if let Some(qk) = used {
            drv.mark_update(qk);
        }
        drv.blocks.push(BlockRecord {
            k,
            evaluated_cols: block.len(),
            kept: filt.len(),
            updated: used.is_some(),
        });
        if cfg.filter {
            let kept = &filt.kept_indices;
            let mut idx = 0;
            window.retain(|_| {
                let keep = kept.contains(&idx);
                idx += 1;
                keep
            });
        }
    }
    unreachable!("rolling loop only exits by returning")
}

/// Classical BFGS with the inverse secant update. The update is skipped when
/// `⟨y,s⟩ ≤ 1e-12‖y‖‖s‖`.
pub fn solve_bfgs(oracle: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<RunTrace, SolverError> {
    expect_method(cfg, &[Method::Bfgs])?;
    run_secant_family(oracle, x0, cfg)
}

/// Damped, cautious and modified BFGS, and gradient descent.
///
/// Damping uses `Bs = −λg`, exact because the direction was `−Hg` with
/// `H = B⁻¹`.
pub fn solve_variant(oracle: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<RunTrace, SolverError> {
    expect_method(
        cfg,
        &[
            Method::DampedBfgs,
            Method::CautiousBfgs,
            Method::ModifiedBfgs,
            Method::GradientDescent,
        ],
    )?;
    run_secant_family(oracle, x0, cfg)
}

fn run_secant_family(oracle: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<RunTrace, SolverError> {
    let mut drv = Driver::new(oracle, x0, cfg)?;
    let n = drv.n();
    let mut h = InverseApprox::scaled_identity(n, cfg.h0_scale);

    for k in 1.. {
        if let Some(t) = drv.stop_reason() {
            return Ok(drv.finish(t));
        }
        let d = if cfg.method == Method::GradientDescent {
            scaled(-1.0, &drv.g)
        } else {
            drv.direction(&mut h)
        };
        let Step { s, y, lambda, g_old } = match drv.take_step(&d, k, 1) {
            Ok(step) => step,
            Err(t) => return Ok(drv.finish(t)),
        };

        let next = match cfg.method {
            Method::Bfgs => {
                if dot(&y, &s) > tol::SECANT_SKIP * norm(&y) * norm(&s) {
                    secant_update(&h, &s, &y).ok()
                } else {
                    None
                }
            }
            Method::DampedBfgs => {
                let bs = scaled(-lambda, &g_old);
                let damp = powell_damp(&s, &y, &bs, cfg.damping_phi);
                if let Some(r) = drv.records.last_mut() {
                    r.damping = Some(DampingRecord {
                        theta: damp.theta,
                        zs: damp.zs,
                        sbs: damp.sbs,
                    });
                }
                secant_update(&h, &s, &damp.z).ok()
            }
            Method::CautiousBfgs => {
                if cautious_gate(&s, &y, &g_old, cfg.cautious_eps, cfg.cautious_exponent) {
                    secant_update(&h, &s, &y).ok()
                } else {
                    None
                }
            }
            Method::ModifiedBfgs => {
                let z = li_fukushima_modify(&s, &y, cfg.modified_eps);
                secant_update(&h, &s, &z).ok()
            }
            Method::GradientDescent => None,
            Method::BlockBfgs | Method::RollingBlockBfgs => unreachable!("block methods have their own drivers"),
        };
        if let Some(next) = next.filter(|m| m.matrix().is_finite()) {
            h = next;
            drv.mark_update(1);
        }
    }
    unreachable!("secant loop only exits by returning")
}
