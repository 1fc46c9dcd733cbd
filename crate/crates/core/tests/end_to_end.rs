use blockbfgs::linalg::{norm, sub};
use blockbfgs::problems::{
    benchmark_oracle, parse_libsvm, synth_manifest, BenchmarkFunction, LossKind, Manifest, ProblemSpec,
};
use blockbfgs::solvers::{solve, Method, SolverConfig, Termination, TRACE_CSV_HEADER};

const ALL_METHODS: [Method; 7] = [
    Method::BlockBfgs,
    Method::RollingBlockBfgs,
    Method::Bfgs,
    Method::DampedBfgs,
    Method::CautiousBfgs,
    Method::ModifiedBfgs,
    Method::GradientDescent,
];

#[test]
fn every_method_solves_rosenbrock() {
    let f = benchmark_oracle(BenchmarkFunction::Rosenbrock, 2).unwrap();
    let x0 = BenchmarkFunction::Rosenbrock.standard_start(2);
    for m in ALL_METHODS {
        let cfg = SolverConfig::new(m).with_tau(1e-5).with_max_steps(20_000).with_grad_tol(1e-6);
        let tr = solve(&f, &x0, &cfg).unwrap();
        assert_eq!(tr.termination, Termination::GradTol, "{m:?}");
        assert!(norm(&sub(&tr.x_final, &[1.0, 1.0])) < 1e-4, "{m:?}");
    }
}

#[test]
fn objective_threshold_stops_early() {
    let f = benchmark_oracle(BenchmarkFunction::Trid, 8).unwrap();
    let x0 = BenchmarkFunction::Trid.standard_start(8);
    let f_min = BenchmarkFunction::Trid.known_minimum(8).unwrap();
    let f_stop = f_min + 0.01 * f_min.abs();
    let cfg = SolverConfig::new(Method::BlockBfgs).with_f_stop(Some(f_stop)).with_grad_tol(1e-12);
    let tr = solve(&f, &x0, &cfg).unwrap();
    assert_eq!(tr.termination, Termination::FStop);
    assert!(tr.f_final <= f_stop);
    assert_eq!(tr.first_step_below(f_stop), Some(tr.steps()));
}

#[test]
fn synthetic_suite_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    let manifest = synth_manifest(42);
    std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
    let back: Manifest = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, manifest);
    let built = back.build().unwrap();
    assert!(built.len() >= 25);
    assert!(built.iter().all(|p| p.oracle.value(&p.x0).is_finite()));
}

#[test]
fn libsvm_problem_trains() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.svm");
    std::fs::write(&path, "+1 1:1.0 2:0.5\n-1 1:-1.0 3:0.2\n+1 2:1.5 3:-0.3\n-1 1:-0.4 2:-1.0\n").unwrap();
    assert_eq!(parse_libsvm(&path, None).unwrap().m(), 4);
    let spec = ProblemSpec::Libsvm {
        name: "toy".into(),
        path,
        loss: LossKind::Logistic,
        n_features: None,
    };
    let p = spec.build().unwrap();
    let tr = solve(p.oracle.as_ref(), &p.x0, &SolverConfig::new(Method::BlockBfgs)).unwrap();
    assert_eq!(tr.termination, Termination::GradTol);
    assert!(tr.f_final < tr.f_initial);
}

#[test]
fn trace_csv_has_one_row_per_step() {
    let f = benchmark_oracle(BenchmarkFunction::Arwhead, 6).unwrap();
    let x0 = BenchmarkFunction::Arwhead.standard_start(6);
    let tr = solve(&f, &x0, &SolverConfig::new(Method::BlockBfgs)).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_CSV_HEADER));
    assert_eq!(lines.count(), tr.steps());
}
