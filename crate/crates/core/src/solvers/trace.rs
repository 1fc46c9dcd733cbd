use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::oracle::EvalCounters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradTol,
    FStop,
    MaxSteps,
    LineSearchFail,
    NonFiniteValue,
}

/// Powell damping applied at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingRecord {
    pub theta: f64,
    pub zs: f64,
    pub sbs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based count of accepted steps.
    pub step: usize,
    /// Block index (equal to `step` for methods without blocks).
    pub k: usize,
    /// Position inside the block, 1-based.
    pub i: usize,
    pub f: f64,
    pub gnorm: f64,
    pub lambda: f64,
    pub snorm: f64,
    /// Cosine of the angle between the step and `−g`, clamped to `[0, 1]`.
    pub cos_theta: f64,
    /// The approximation was updated after this step.
    pub updated: bool,
    /// Directions used by that update.
    pub qk: usize,
    /// Seconds since the solve started.
    pub elapsed: f64,
    pub damping: Option<DampingRecord>,
}

/// Per-block accounting for block methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub k: usize,
    /// Hessian-action columns evaluated for this block.
    pub evaluated_cols: usize,
    pub kept: usize,
    pub updated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub method: String,
    pub records: Vec<StepRecord>,
    pub blocks: Vec<BlockRecord>,
    pub counters: EvalCounters,
    pub wall_time: f64,
    pub termination: Termination,
    pub f_initial: f64,
    pub gnorm_initial: f64,
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub gnorm_final: f64,
    /// Times the approximation was reset because `−Hg` was not a descent direction.
    pub resets: usize,
    /// `x₀, x₁, …` when requested by the configuration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<f64>>,
}

/// Summary written next to the per-step CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub termination: Termination,
    pub steps: usize,
    pub counters: EvalCounters,
    pub wall_time: f64,
    pub f_final: f64,
    pub gnorm_final: f64,
    pub resets: usize,
}

pub const TRACE_CSV_HEADER: &str = "step,k,i,f,gnorm,lambda,snorm,costheta,updated,qk";

impl RunTrace {
    pub fn steps(&self) -> usize {
        self.records.len()
    }

    /// Objective values with the starting value first, indexed by step count.
    pub fn f_history(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.f_initial).chain(self.records.iter().map(|r| r.f))
    }

    /// First step count at which `f ≤ threshold`, if ever.
    pub fn first_step_below(&self, threshold: f64) -> Option<usize> {
        self.f_history().position(|f| f <= threshold)
    }

    /// Elapsed seconds at the first step where `f ≤ threshold`.
    pub fn first_time_below(&self, threshold: f64) -> Option<f64> {
        let step = self.first_step_below(threshold)?;
        Some(if step == 0 { 0.0 } else { self.records[step - 1].elapsed })
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            method: self.method.clone(),
            termination: self.termination,
            steps: self.steps(),
            counters: self.counters,
            wall_time: self.wall_time,
            f_final: self.f_final,
            gnorm_final: self.gnorm_final,
            resets: self.resets,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{:e},{:e},{:e},{:e},{:e},{},{}",
                r.step,
                r.k,
                r.i,
                r.f,
                r.gnorm,
                r.lambda,
                r.snorm,
                r.cos_theta,
                u8::from(r.updated),
                r.qk
            )?;
        }
        Ok(())
    }
}
