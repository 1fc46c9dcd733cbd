use std::path::Path;
use std::process::Command;

use blockbfgs::problems::{synth_manifest, Category, Manifest, ProblemSpec};
use blockbfgs::solvers::{Method, SolverConfig};
use blockbfgs_bench::{read_costs_csv, run_grid, write_costs_csv, Metric, SolverEntry};

fn small_suite() -> Manifest {
    synth_manifest(42).filter(|p| matches!(p.category(), Category::Quadratic | Category::Logistic))
}

fn solvers() -> Vec<SolverEntry> {
    vec![
        SolverEntry::new("block", SolverConfig::new(Method::BlockBfgs)),
        SolverEntry::new("bfgs", SolverConfig::new(Method::Bfgs)),
    ]
}

#[test]
fn looser_tolerance_never_costs_more() {
    let problems = small_suite().build().unwrap();
    let grid = run_grid(&problems, &solvers(), &[0.2, 0.01], Metric::Steps, 4).unwrap();
    let (_, loose, _) = &grid.costs[0];
    let (_, tight, _) = &grid.costs[1];
    assert_eq!(loose.problems, tight.problems);
    for (a, b) in loose.t.iter().zip(&tight.t) {
        for (x, y) in a.iter().zip(b) {
            assert!(x <= y);
        }
    }
}

#[test]
fn step_grids_repeat_exactly() {
    let problems = small_suite().build().unwrap();
    let a = run_grid(&problems, &solvers(), &[0.1], Metric::Steps, 4).unwrap();
    let b = run_grid(&problems, &solvers(), &[0.1], Metric::Steps, 1).unwrap();
    assert_eq!(a.costs[0].1, b.costs[0].1);
}

#[test]
fn failed_runs_are_unsolved_not_fatal() {
    let problems = small_suite().build().unwrap();
    let mut bad = SolverConfig::new(Method::Bfgs);
    bad.max_steps = 1;
    let entries = vec![SolverEntry::new("block", SolverConfig::new(Method::BlockBfgs)), SolverEntry::new("one_step", bad)];
    let grid = run_grid(&problems[..3], &entries, &[0.01], Metric::Steps, 1).unwrap();
    assert!(grid.costs[0].1.t.iter().all(|row| row[1].is_infinite()));
    assert!(grid.costs[0].1.t.iter().all(|row| row[0].is_finite()));
}

#[test]
fn cpu_metric_costs_are_times() {
    let problems = small_suite().build().unwrap();
    let grid = run_grid(&problems[..2], &solvers(), &[0.1], Metric::CpuTime, 8).unwrap();
    assert!(grid.costs[0].1.t.iter().flatten().all(|c| c.is_finite() && *c >= 0.0 && *c < 10.0));
}

#[test]
fn costs_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let problems = small_suite().build().unwrap();
    let grid = run_grid(&problems[..4], &solvers(), &[0.1], Metric::Steps, 2).unwrap();
    let path = dir.path().join("costs.csv");
    write_costs_csv(&path, &grid.costs[0].1).unwrap();
    assert_eq!(read_costs_csv(&path).unwrap(), grid.costs[0].1);
}

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blockbfgs-bench")).args(args).output().unwrap()
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap()
}

#[test]
fn cli_run_profile_check_and_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    let out = bench(&["suite", "--kind", "synth", "--seed", "42", "--out", suite.to_str().unwrap()]);
    assert!(out.status.success());
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(&suite).unwrap()).unwrap();
    let small = manifest.filter(|p| matches!(p, ProblemSpec::Quadratic { n, .. } if *n <= 50));
    std::fs::write(&suite, serde_json::to_string(&small).unwrap()).unwrap();

    let run_dir = dir.path().join("run");
    let out = bench(&["run", "--suite", suite.to_str().unwrap(), "--metric", "steps", "--eps", "0.1,0.01", "--seed", "42", "--out", run_dir.to_str().unwrap(), "--parallel", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["costs_0.1.csv", "costs_0.01.csv", "profile_0.01.csv", "profile_0.01.svg", "run_manifest.json"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    assert!(String::from_utf8(read(&run_dir, "profile_0.01.svg")).unwrap().contains("<path"));

    let prof_dir = dir.path().join("prof");
    let costs = run_dir.join("costs_0.01.csv");
    let out = bench(&["profile", "--costs", costs.to_str().unwrap(), "--out", prof_dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(read(&prof_dir, "profile_0.01.csv"), read(&run_dir, "profile_0.01.csv"));

    let out = bench(&["check", "--suite", suite.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), small.problems.len());

    let out = bench(&["run", "--metric", "nope", "--out", "x"]);
    assert!(!out.status.success());
}
