use blockbfgs::linalg::{DenseMatrix, SymMatrix};
use blockbfgs::updates::{all_steps, block_update_direct, block_update_inverse, InverseApprox, StepBlock};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn na_sym(a: &SymMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
}

fn from_na_sym(a: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

fn from_na(a: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    r.transpose() * &r / n as f64 + DMatrix::identity(n, n) * 0.5
}

struct Instance {
    h: DMatrix<f64>,
    g: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl Instance {
    fn new(n: usize, q: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = spd(n, &mut rng);
        let g = spd(n, &mut rng);
        let d = DMatrix::from_fn(n, q, |_, _| rng.random_range(-1.0..1.0));
        Self { h, g, d }
    }

    fn updated(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        let block = StepBlock::new(from_na(d), from_na(&(&self.g * d)));
        let h = InverseApprox::new(from_na_sym(&self.h));
        na_sym(block_update_inverse(&h, &all_steps(&block)).unwrap().matrix())
    }
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=12).prop_flat_map(|n| (Just(n), 1usize..=n.min(4)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_update_solves_sketching_equation((n, q) in dims(), seed in any::<u64>()) {
        let inst = Instance::new(n, q, seed);
        let hp = inst.updated(&inst.d);
        let y = &inst.g * &inst.d;
        let residual = (&hp * &y - &inst.d).norm() / inst.d.norm();
        prop_assert!(residual <= 1e-8, "residual {residual:e}");
        prop_assert!(hp.clone().cholesky().is_some());
    }

    #[test]
    fn inverse_and_direct_updates_are_inverses((n, q) in dims(), seed in any::<u64>()) {
        let inst = Instance::new(n, q, seed);
        let hp = inst.updated(&inst.d);
        let b = inst.h.clone().try_inverse().unwrap();
        let block = StepBlock::new(from_na(&inst.d), from_na(&(&inst.g * &inst.d)));
        let bp = na_sym(&block_update_direct(&from_na_sym(&b), &all_steps(&block)).unwrap());
        let err = (&bp * &hp - DMatrix::identity(n, n)).norm() / (n as f64).sqrt();
        prop_assert!(err <= 1e-7, "‖B⁺H⁺ − I‖ = {err:e}");

        // det(B⁺)/det(B) = det(DᵀGD)/det(DᵀBD)
        let lhs = bp.determinant() / b.determinant();
        let dt = inst.d.transpose();
        let rhs = (&dt * &inst.g * &inst.d).determinant() / (&dt * &b * &inst.d).determinant();
        prop_assert!((lhs - rhs).abs() <= 1e-7 * rhs.abs());
    }

    #[test]
    fn update_ignores_choice_of_basis((n, q) in dims(), seed in any::<u64>()) {
        let inst = Instance::new(n, q, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let p = DMatrix::from_fn(q, q, |i, j| rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
        let a = inst.updated(&inst.d);
        let b = inst.updated(&(&inst.d * p));
        prop_assert!((&a - &b).norm() <= 1e-8 * a.norm());
    }

    #[test]
    fn update_is_nearest_in_weighted_norm((n, q) in dims(), seed in any::<u64>(), t in -1.0f64..1.0) {
        let inst = Instance::new(n, q, seed);
        let hp = inst.updated(&inst.d);
        let y = &inst.g * &inst.d;
        // Symmetric N with NY = 0 keeps H⁺ + tN feasible.
        let qr = y.clone().qr();
        let qy = qr.q();
        let proj = DMatrix::identity(n, n) - &qy * qy.transpose();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let z = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let nmat = &proj * (&z + z.transpose()) * &proj;
        let gnorm = |x: &DMatrix<f64>| (x * &inst.g * x * &inst.g).trace().max(0.0).sqrt();
        let base = gnorm(&(&hp - &inst.h));
        let moved = gnorm(&(&hp + &nmat * t - &inst.h));
        prop_assert!(moved >= base - 1e-10);
    }
}
