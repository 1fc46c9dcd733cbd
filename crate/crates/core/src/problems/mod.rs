//! Objective library: regularized logistic regression, tanh loss, log-barrier
//! QPs reduced to their constraint null space, quadratics, standard test
//! functions, LIBSVM ingestion and a seeded synthetic suite.

mod barrier;
mod benchmarks;
mod dataset;
mod losses;
mod quadratic;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError, SymMatrix};
use crate::oracle::Objective;

pub use barrier::{barrier_oracle, reduce_qp_to_barrier, BarrierObjective, BarrierProblem, QpStandardForm, DEFAULT_MU};
pub use benchmarks::{benchmark_oracle, BenchmarkFunction, BenchmarkObjective};
pub use dataset::{parse_libsvm, parse_libsvm_str, sparse_dot, synthetic_dataset, SparseDataset, SparseRow};
pub use losses::{
    logistic_oracle, tanh_oracle, LogisticLoss, LogisticObjective, MarginLoss, MarginObjective, Regularizer,
    TanhLoss, TanhObjective,
};
pub use quadratic::{random_orthogonal, random_spd, QuadraticObjective};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset has no points")]
    EmptyDataset,
    #[error("expected two label classes, found {0}")]
    MultiClass(usize),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("no strictly feasible point found")]
    Infeasible,
    #[error("constraint matrix is rank deficient (rank {rank})")]
    RankDeficient { rank: usize },
    #[error("unknown benchmark function '{0}'")]
    UnknownFunction(String),
    #[error("{function} is not defined for n = {n}")]
    BadDimension { function: String, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Logistic,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Quadratic,
    Logistic,
    Tanh,
    Barrier,
    Benchmark,
}

/// How a benchmark function's starting point is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StartPoint {
    Standard,
    /// Componentwise uniform on `[−s, s]`, `s = max(1, ‖x_std‖_∞)`.
    Random { seed: u64 },
}

/// One entry of a problem manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    Quadratic {
        name: String,
        seed: u64,
        n: usize,
        cond: f64,
    },
    Logistic {
        name: String,
        seed: u64,
        m: usize,
        n: usize,
        separable: bool,
        /// Use `Q = I + RᵀR/n` instead of `Q = I`.
        random_reg: bool,
    },
    Tanh {
        name: String,
        seed: u64,
        m: usize,
        n: usize,
    },
    BarrierQp {
        name: String,
        seed: u64,
        /// Variables of the standard-form QP.
        n: usize,
        /// Equality constraints.
        m: usize,
    },
    Benchmark {
        name: String,
        function: BenchmarkFunction,
        n: usize,
        start: StartPoint,
    },
    Libsvm {
        name: String,
        path: PathBuf,
        loss: LossKind,
        #[serde(default)]
        n_features: Option<usize>,
    },
}

/// A built problem ready for a solver.
pub struct SuiteProblem {
    pub name: String,
    pub category: Category,
    pub convex: bool,
    pub oracle: Box<dyn Objective>,
    pub x0: Vec<f64>,
    /// Exact minimizer, when available by direct solve.
    pub minimizer: Option<Vec<f64>>,
}

impl std::fmt::Debug for SuiteProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuiteProblem")
            .field("name", &self.name)
            .field("category", &self.category)
            .field("n", &self.x0.len())
            .finish()
    }
}

/// Ordered list of problem specifications, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub problems: Vec<ProblemSpec>,
}

impl Manifest {
    pub fn build(&self) -> Result<Vec<SuiteProblem>, ProblemError> {
        self.problems.iter().map(ProblemSpec::build).collect()
    }

    pub fn filter(&self, keep: impl Fn(&ProblemSpec) -> bool) -> Manifest {
        Manifest {
            seed: self.seed,
            problems: self.problems.iter().filter(|p| keep(p)).cloned().collect(),
        }
    }
}

/// Independent stream for member `index` of a suite seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform_vec(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..=1.0)).collect()
}

/// `I + RᵀR/n` with `R` a dense Gaussian `n×n` matrix.
pub fn random_regularizer(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let rtr = SymMatrix::from_dense_symmetrized(&r.tr_mul(&r).expect("square")).expect("square");
    let mut q = rtr;
    q.scale(1.0 / n as f64);
    q.add(&SymMatrix::identity(n))
}

/// Random standard-form QP with a strictly feasible point. The first
/// constraint row is all ones so the feasible set is bounded.
pub fn random_feasible_qp(n: usize, m: usize, rng: &mut ChaCha8Rng) -> (QpStandardForm, Vec<f64>) {
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let mut q = SymMatrix::from_dense_symmetrized(&r.tr_mul(&r).expect("square")).expect("square");
    q.scale(1.0 / n as f64);
    let c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let a = DenseMatrix::from_fn(m, n, |i, _| if i == 0 { 1.0 } else { rng.sample(StandardNormal) });
    let x_feas: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let b = a.mul_vec(&x_feas);
    (QpStandardForm { q, c, a, b }, x_feas)
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        match self {
            ProblemSpec::Quadratic { name, .. }
            | ProblemSpec::Logistic { name, .. }
            | ProblemSpec::Tanh { name, .. }
            | ProblemSpec::BarrierQp { name, .. }
            | ProblemSpec::Benchmark { name, .. }
            | ProblemSpec::Libsvm { name, .. } => name,
        }
    }

    pub fn category(&self) -> Category {
        match self {
            ProblemSpec::Quadratic { .. } => Category::Quadratic,
            ProblemSpec::Logistic { .. } => Category::Logistic,
            ProblemSpec::Tanh { .. } => Category::Tanh,
            ProblemSpec::BarrierQp { .. } => Category::Barrier,
            ProblemSpec::Benchmark { .. } => Category::Benchmark,
            ProblemSpec::Libsvm { loss, .. } => match loss {
                LossKind::Logistic => Category::Logistic,
                LossKind::Tanh => Category::Tanh,
            },
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self.category(),
            Category::Quadratic | Category::Logistic | Category::Barrier
        )
    }

    /// Constructs the oracle and starting point. Deterministic in the spec.
    pub fn build(&self) -> Result<SuiteProblem, ProblemError> {
        let problem = |oracle: Box<dyn Objective>, x0: Vec<f64>, minimizer: Option<Vec<f64>>| SuiteProblem {
            name: self.name().to_string(),
            category: self.category(),
            convex: self.is_convex(),
            oracle,
            x0,
            minimizer,
        };
        match self {
            &ProblemSpec::Quadratic { seed, n, cond, .. } => {
                if n == 0 || !(cond >= 1.0) {
                    return Err(ProblemError::InvalidParameter(format!("quadratic n={n}, cond={cond}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut a = random_spd(n, cond, &mut rng);
                a.scale(quadratic_spectrum_scale(cond));
                let x_star: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let b = a.mul_vec(&x_star);
                let x0 = uniform_vec(n, 1.0, &mut rng);
                let q = QuadraticObjective::new(a, b);
                let minimizer = q.minimizer()?;
                Ok(problem(Box::new(q), x0, Some(minimizer)))
            }
            &ProblemSpec::Logistic {
                seed,
                m,
                n,
                separable,
                random_reg,
                ..
            } => {
                check_data_shape(m, n)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let data = synthetic_dataset(m, n, 0.5, separable, &mut rng);
                let reg = if random_reg {
                    Regularizer::Matrix(random_regularizer(n, &mut rng))
                } else {
                    Regularizer::Identity
                };
                Ok(problem(Box::new(logistic_oracle(data, reg)?), vec![0.0; n], None))
            }
            &ProblemSpec::Tanh { seed, m, n, .. } => {
                check_data_shape(m, n)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let data = synthetic_dataset(m, n, 0.5, false, &mut rng);
                let x0 = uniform_vec(n, 1.0, &mut rng);
                Ok(problem(Box::new(tanh_oracle(data)), x0, None))
            }
            &ProblemSpec::BarrierQp { seed, n, m, .. } => {
                if m == 0 || m >= n {
                    return Err(ProblemError::InvalidParameter(format!("barrier QP n={n}, m={m}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (qp, x_feas) = random_feasible_qp(n, m, &mut rng);
                let bp = reduce_qp_to_barrier(&qp, Some(&x_feas), DEFAULT_MU)?;
                let dim = bp.dim();
                Ok(problem(Box::new(barrier_oracle(bp)), vec![0.0; dim], None))
            }
            &ProblemSpec::Benchmark { function, n, start, .. } => {
                let oracle = benchmark_oracle(function, n)?;
                let standard = function.standard_start(n);
                let x0 = match start {
                    StartPoint::Standard => standard,
                    StartPoint::Random { seed } => {
                        let scale = standard.iter().fold(1.0f64, |s, v| s.max(v.abs()));
                        uniform_vec(n, scale, &mut ChaCha8Rng::seed_from_u64(seed))
                    }
                };
                Ok(problem(Box::new(oracle), x0, None))
            }
            ProblemSpec::Libsvm {
                path,
                loss,
                n_features,
                ..
            } => {
                let data = parse_libsvm(path, *n_features)?;
                let n = data.n();
                let oracle: Box<dyn Objective> = match loss {
                    LossKind::Logistic => Box::new(logistic_oracle(data, Regularizer::Identity)?),
                    LossKind::Tanh => Box::new(tanh_oracle(data)),
                };
                Ok(problem(oracle, vec![0.0; n], None))
            }
        }
    }
}

/// Suite quadratics have spectrum `[λ, λ·cond]` with `λ = max(1/cond, 1e-3)`.
pub fn quadratic_spectrum_scale(cond: f64) -> f64 {
    (1e-3 * cond).max(1.0)
}

fn check_data_shape(m: usize, n: usize) -> Result<(), ProblemError> {
    if m == 0 {
        return Err(ProblemError::EmptyDataset);
    }
    if n == 0 {
        return Err(ProblemError::InvalidParameter("feature count must be positive".into()));
    }
    Ok(())
}

pub const QUADRATIC_DIMS: [usize; 4] = [20, 50, 80, 100];
pub const QUADRATIC_CONDS: [f64; 3] = [1e1, 1e3, 1e5];

/// Deterministic synthetic suite: 12 quadratics, 10 logistic problems, 5
/// tanh problems and 5 barrier QPs.
pub fn synth_manifest(seed: u64) -> Manifest {
    let mut problems = Vec::new();
    let mut index = 0u64;
    let mut next_seed = || {
        index += 1;
        derive_seed(seed, index)
    };
    for &n in &QUADRATIC_DIMS {
        for &cond in &QUADRATIC_CONDS {
            problems.push(ProblemSpec::Quadratic {
                name: format!("quad_n{n}_c{cond:.0e}"),
                seed: next_seed(),
                n,
                cond,
            });
        }
    }
    for k in 0..10usize {
        let n = 10 + 5 * k;
        let separable = k % 2 == 0;
        let random_reg = k % 4 >= 2;
        problems.push(ProblemSpec::Logistic {
            name: format!(
                "logit_{k}_n{n}_{}{}",
                if separable { "sep" } else { "nonsep" },
                if random_reg { "_q" } else { "" }
            ),
            seed: next_seed(),
            m: 200,
            n,
            separable,
            random_reg,
        });
    }
    for k in 0..5usize {
        let n = 10 + 5 * k;
        problems.push(ProblemSpec::Tanh {
            name: format!("tanh_{k}_n{n}"),
            seed: next_seed(),
            m: 200,
            n,
        });
    }
    for k in 0..5usize {
        let n = 20 + 5 * k;
        let m = 2 + k;
        problems.push(ProblemSpec::BarrierQp {
            name: format!("barrier_{k}_n{n}_m{m}"),
            seed: next_seed(),
            n,
            m,
        });
    }
    Manifest { seed, problems }
}

/// Builds every member of [`synth_manifest`].
pub fn synth_suite(seed: u64) -> Vec<SuiteProblem> {
    synth_manifest(seed).build().expect("synthetic suite members are well formed")
}

/// Test functions at dimension `n` (or the nearest valid one) from the
/// standard start plus `random_starts` seeded random starts each.
pub fn benchmark_manifest(n: usize, seed: u64, random_starts: usize) -> Manifest {
    let mut problems = Vec::new();
    let mut index = 0u64;
    for function in BenchmarkFunction::ALL {
        let mut dim = n.max(function.min_dim());
        if !function.accepts_dim(dim) {
            dim += 1;
        }
        problems.push(ProblemSpec::Benchmark {
            name: format!("{function}_n{dim}"),
            function,
            n: dim,
            start: StartPoint::Standard,
        });
        for r in 0..random_starts {
            index += 1;
            problems.push(ProblemSpec::Benchmark {
                name: format!("{function}_n{dim}_r{r}"),
                function,
                n: dim,
                start: StartPoint::Random {
                    seed: derive_seed(seed, index),
                },
            });
        }
    }
    Manifest { seed, problems }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_gradient, check_hess_action};

    #[test]
    fn suite_composition() {
        let m = synth_manifest(42);
        let count = |c: Category| m.problems.iter().filter(|p| p.category() == c).count();
        assert!(count(Category::Quadratic) >= 10);
        assert!(count(Category::Logistic) >= 10);
        assert!(count(Category::Tanh) >= 5);
        assert!(count(Category::Barrier) >= 5);
        let separable = m
            .problems
            .iter()
            .filter(|p| matches!(p, ProblemSpec::Logistic { separable: true, .. }))
            .count();
        assert!(separable > 0 && separable < 10);
    }

    #[test]
    fn same_seed_same_suite() {
        let a = synth_suite(7);
        let b = synth_suite(7);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.name, q.name);
            assert_eq!(p.x0, q.x0);
            let x: Vec<f64> = (0..p.x0.len()).map(|i| 0.01 * i as f64).collect();
            assert_eq!(p.oracle.value(&x).to_bits(), q.oracle.value(&x).to_bits());
            assert_eq!(p.oracle.gradient(&x), q.oracle.gradient(&x));
        }
        let c = synth_suite(8);
        assert_ne!(a[0].x0, c[0].x0);
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let m = synth_manifest(3);
        let text = serde_json::to_string_pretty(&m).unwrap();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.contains("\"type\": \"barrier_qp\""));
    }

    #[test]
    fn barrier_members_start_in_domain() {
        for p in synth_suite(1).iter().filter(|p| p.category == Category::Barrier) {
            assert!(p.oracle.value(&p.x0).is_finite(), "{}", p.name);
        }
    }

    #[test]
    fn suite_members_pass_derivative_checks() {
        for p in synth_suite(11) {
            let n = p.x0.len();
            let v: Vec<f64> = (0..n).map(|i| ((i * 7 % 5) as f64 - 2.0) / 3.0).collect();
            let h = 1e-6 * (1.0 + crate::linalg::norm(&p.x0));
            let ge = check_gradient(p.oracle.as_ref(), &p.x0, h).unwrap();
            let he = check_hess_action(p.oracle.as_ref(), &p.x0, &v, h).unwrap();
            assert!(ge <= 1e-5, "{} gradient {ge:e}", p.name);
            assert!(he <= 1e-4, "{} Hessian {he:e}", p.name);
        }
    }

    #[test]
    fn benchmark_manifest_covers_all_functions() {
        let m = benchmark_manifest(10, 5, 2);
        assert_eq!(m.problems.len(), BenchmarkFunction::ALL.len() * 3);
        for p in m.build().unwrap() {
            assert!(p.oracle.value(&p.x0).is_finite(), "{}", p.name);
        }
    }
}
