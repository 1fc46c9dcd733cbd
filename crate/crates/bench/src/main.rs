use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blockbfgs::problems::{benchmark_manifest, synth_manifest, Manifest};
use blockbfgs_bench::{
    default_solvers, derivative_check, performance_profile, read_costs_csv, run_grid, write_profile_csv,
    write_profile_svg, write_run_outputs, BenchError, Metric, RunManifest, SolverEntry,
};

#[derive(Parser)]
#[command(name = "blockbfgs-bench", version, about = "Solver grids and performance profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Steps,
    Cpu,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteKind {
    Synth,
    Benchmarks,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver on every problem and write costs and profiles.
    Run {
        /// Problem manifest (JSON). Defaults to the synthetic convex suite.
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Solver list (JSON array of {name, config}).
        #[arg(long)]
        solvers: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "steps")]
        metric: MetricArg,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.01")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Recompute profile curves from a saved cost matrix.
    Profile {
        #[arg(long)]
        costs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference derivative checks on every oracle of a suite.
    Check {
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Write a built-in suite manifest.
    Suite {
        #[arg(long, value_enum, default_value = "synth")]
        kind: SuiteKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Dimension of benchmark functions.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Extra random starts per benchmark function.
        #[arg(long, default_value_t = 0)]
        random_starts: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_suite(path: Option<&Path>, seed: u64) -> Result<Manifest, BenchError> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(synth_manifest(seed)),
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Run {
            suite,
            solvers,
            metric,
            eps,
            seed,
            out,
            parallel,
        } => {
            let manifest = load_suite(suite.as_deref(), seed)?;
            let solvers: Vec<SolverEntry> = match solvers {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => default_solvers(),
            };
            let metric = match metric {
                MetricArg::Steps => Metric::Steps,
                MetricArg::Cpu => Metric::CpuTime,
            };
            let problems = manifest.build()?;
            let grid = run_grid(&problems, &solvers, &eps, metric, parallel)?;
            for (e, costs, dropped) in &grid.costs {
                eprintln!("eps {e}: {} problems retained", costs.problems.len());
                for name in dropped {
                    eprintln!("eps {e}: dropped '{name}' (unsolved by every solver)");
                }
            }
            let record = RunManifest {
                seed,
                metric,
                eps: eps.clone(),
                parallel: if metric == Metric::CpuTime { 1 } else { parallel },
                suite: manifest,
                solvers,
                f_best: grid.f_best.clone(),
                dropped: grid.costs.iter().map(|(e, _, d)| (*e, d.clone())).collect(),
                runs: grid.runs.clone(),
            };
            write_run_outputs(&out, &grid, &record)?;
            Ok(true)
        }
        Command::Profile { costs, out } => {
            let matrix = read_costs_csv(&costs)?;
            let (matrix, dropped) = matrix.drop_unsolved();
            for name in &dropped {
                eprintln!("dropped '{name}' (unsolved by every solver)");
            }
            let curves = performance_profile(&matrix)?;
            let stem = costs.file_stem().and_then(|s| s.to_str()).unwrap_or("costs");
            let label = stem.strip_prefix("costs").unwrap_or("");
            fs::create_dir_all(&out)?;
            write_profile_csv(&out.join(format!("profile{label}.csv")), &curves)?;
            write_profile_svg(&out.join(format!("profile{label}.svg")), &curves, "Performance profile")?;
            Ok(true)
        }
        Command::Check { suite, seed } => {
            let manifest = load_suite(suite.as_deref(), seed)?;
            let mut ok = true;
            for (i, p) in manifest.build()?.iter().enumerate() {
                let r = derivative_check(p, seed.wrapping_add(i as u64));
                let status = if r.passed() { "ok" } else { "FAIL" };
                ok &= r.passed();
                match &r.error {
                    Some(e) => println!("{status:4} {:<32} {e}", r.problem),
                    None => println!(
                        "{status:4} {:<32} grad {:.2e}  hess-action {:.2e}",
                        r.problem, r.gradient_error, r.hess_action_error
                    ),
                }
            }
            Ok(ok)
        }
        Command::Suite {
            kind,
            seed,
            n,
            random_starts,
            out,
        } => {
            let manifest = match kind {
                SuiteKind::Synth => synth_manifest(seed),
                SuiteKind::Benchmarks => benchmark_manifest(n, seed, random_starts),
            };
            fs::write(&out, serde_json::to_string_pretty(&manifest)? + "\n")?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
