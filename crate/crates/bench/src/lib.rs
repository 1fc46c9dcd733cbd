//! Solver-by-problem experiment grids, reference objective thresholds and
//! Dolan–Moré performance profiles.

mod checks;
mod fstop;
mod grid;
mod output;
mod profile;

use thiserror::Error;

pub use checks::{derivative_check, DerivativeReport, GRADIENT_CHECK_TOL, HESS_ACTION_CHECK_TOL};
pub use fstop::{compute_fstop, fstop_from_optimum, reference_config, FStop};
pub use grid::{default_solvers, run_grid, GridResult, Metric, RunOutcome, SolverEntry};
pub use output::{
    eps_label, read_costs_csv, write_costs_csv, write_profile_csv, write_profile_svg, write_run_outputs,
    RunManifest,
};
pub use profile::{performance_profile, CostMatrix, ProfileCurve};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("reference run made no progress: {0}")]
    ReferenceFailed(String),
    #[error("cost matrix has no problems or no solvers")]
    EmptyInput,
    #[error("problem '{0}' is unsolved by every solver")]
    UnsolvedProblem(String),
    #[error("cost matrix is malformed: {0}")]
    MalformedCosts(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Problem(#[from] blockbfgs::problems::ProblemError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
