use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use blockbfgs::problems::SuiteProblem;
use blockbfgs::solvers::{solve, Method, RunTrace, SolverConfig, Termination};

use crate::profile::CostMatrix;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Steps taken; every inner step of a block counts once.
    Steps,
    /// Elapsed seconds of the solve.
    CpuTime,
}

impl FromStr for Metric {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "steps" => Ok(Metric::Steps),
            "cpu" | "cpu_time" => Ok(Metric::CpuTime),
            other => Err(BenchError::InvalidArgument(format!("unknown metric '{other}'"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Steps => "steps",
            Metric::CpuTime => "cpu",
        })
    }
}

/// A named solver configuration, one column of the cost matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    pub name: String,
    pub config: SolverConfig,
}

impl SolverEntry {
    pub fn new(name: impl Into<String>, config: SolverConfig) -> Self {
        Self {
            name: name.into(),
            config,
        }
    }
}

pub fn default_solvers() -> Vec<SolverEntry> {
    [Method::BlockBfgs, Method::RollingBlockBfgs, Method::Bfgs]
        .into_iter()
        .map(|m| SolverEntry::new(m.name(), SolverConfig::new(m)))
        .collect()
}

/// One solver on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub problem: String,
    pub solver: String,
    pub termination: Option<Termination>,
    pub error: Option<String>,
    pub steps: usize,
    pub f_final: f64,
    pub gnorm_final: f64,
    /// Objective after each step, starting value first.
    #[serde(skip)]
    pub f_history: Vec<f64>,
    /// Elapsed seconds after each step, zero first.
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub trace: Option<RunTrace>,
}

impl RunOutcome {
    fn from_result(problem: &str, solver: &str, result: Result<RunTrace, String>) -> Self {
        match result {
            Ok(trace) => RunOutcome {
                problem: problem.into(),
                solver: solver.into(),
                termination: Some(trace.termination),
                error: None,
                steps: trace.steps(),
                f_final: trace.f_final,
                gnorm_final: trace.gnorm_final,
                f_history: trace.f_history().collect(),
                times: std::iter::once(0.0).chain(trace.records.iter().map(|r| r.elapsed)).collect(),
                trace: Some(trace),
            },
            Err(e) => RunOutcome {
                problem: problem.into(),
                solver: solver.into(),
                termination: None,
                error: Some(e),
                steps: 0,
                f_final: f64::NAN,
                gnorm_final: f64::NAN,
                f_history: Vec::new(),
                times: Vec::new(),
                trace: None,
            },
        }
    }

    fn best_value(&self) -> f64 {
        self.f_history.iter().cloned().filter(|f| f.is_finite()).fold(f64::INFINITY, f64::min)
    }

    fn cost(&self, threshold: f64, metric: Metric) -> f64 {
        match self.f_history.iter().position(|&f| f <= threshold) {
            Some(i) => match metric {
                Metric::Steps => i as f64,
                Metric::CpuTime => self.times[i],
            },
            None => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub metric: Metric,
    /// `(ε, retained costs, problems dropped as unsolved by all)`.
    pub costs: Vec<(f64, CostMatrix, Vec<String>)>,
    /// Best objective per problem over every run.
    pub f_best: Vec<(String, f64)>,
    /// Problem-major, solver-minor.
    pub runs: Vec<RunOutcome>,
}

fn run_one(problem: &SuiteProblem, entry: &SolverEntry) -> RunOutcome {
    let result = solve(problem.oracle.as_ref(), &problem.x0, &entry.config).map_err(|e| e.to_string());
    RunOutcome::from_result(&problem.name, &entry.name, result)
}

/// Runs every solver on every problem and extracts one cost matrix per `ε`.
///
/// The cost of a run is the first step (or elapsed time) at which its
/// objective reaches `f_p + ε|f_p|`, with `f_p` the best value any run found.
/// CPU-time grids run on a single worker after one discarded warm-up solve.
pub fn run_grid(
    problems: &[SuiteProblem],
    solvers: &[SolverEntry],
    eps: &[f64],
    metric: Metric,
    parallelism: usize,
) -> Result<GridResult, BenchError> {
    if problems.is_empty() || solvers.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    if let Some(e) = eps.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(BenchError::InvalidArgument(format!("epsilon {e} must be finite and non-negative")));
    }
    for entry in solvers {
        entry
            .config
            .validate()
            .map_err(|e| BenchError::InvalidArgument(format!("solver '{}': {e}", entry.name)))?;
    }
    let workers = match metric {
        Metric::CpuTime => 1,
        Metric::Steps => parallelism.max(1),
    };
    let pairs: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..solvers.len()).map(move |s| (p, s)))
        .collect();
    let runs: Vec<RunOutcome> = if workers == 1 {
        if metric == Metric::CpuTime {
            let _ = run_one(&problems[0], &solvers[0]);
        }
        pairs.iter().map(|&(p, s)| run_one(&problems[p], &solvers[s])).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| BenchError::InvalidArgument(e.to_string()))?;
        pool.install(|| pairs.par_iter().map(|&(p, s)| run_one(&problems[p], &solvers[s])).collect())
    };

    let n_s = solvers.len();
    let f_best: Vec<(String, f64)> = problems
        .iter()
        .enumerate()
        .map(|(p, prob)| {
            let best = runs[p * n_s..(p + 1) * n_s]
                .iter()
                .map(RunOutcome::best_value)
                .fold(f64::INFINITY, f64::min);
            (prob.name.clone(), best)
        })
        .collect();

    let solver_names: Vec<String> = solvers.iter().map(|s| s.name.clone()).collect();
    let problem_names: Vec<String> = problems.iter().map(|p| p.name.clone()).collect();
    let mut costs = Vec::with_capacity(eps.len());
    for &e in eps {
        let t: Vec<Vec<f64>> = f_best
            .iter()
            .enumerate()
            .map(|(p, &(_, fp))| {
                let threshold = fp + e * fp.abs();
                runs[p * n_s..(p + 1) * n_s]
                    .iter()
                    .map(|r| if fp.is_finite() { r.cost(threshold, metric) } else { f64::INFINITY })
                    .collect()
            })
            .collect();
        let matrix = CostMatrix::new(solver_names.clone(), problem_names.clone(), t)?;
        let (kept, dropped) = matrix.drop_unsolved();
        costs.push((e, kept, dropped));
    }
    Ok(GridResult {
        metric,
        costs,
        f_best,
        runs,
    })
}
