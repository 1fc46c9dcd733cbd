use blockbfgs::linalg::{dot, DenseMatrix};
use blockbfgs::updates::{filter_steps, StepBlock};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn from_na(a: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

/// Symmetric positive semidefinite matrix with a random spectrum in `[0, 1]`
/// and the given number of zero eigenvalues.
fn psd(n: usize, zeros: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let diag = DMatrix::from_fn(n, n, |i, j| {
        if i != j || i < zeros {
            0.0
        } else {
            10f64.powf(rng.random_range(-4.0..0.0))
        }
    });
    &q * diag * q.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kept_columns_pass_threshold_and_are_well_conditioned(
        n in 2usize..10, q in 1usize..5, seed in any::<u64>(), log_tau in -6.0f64..-1.0
    ) {
        let tau = 10f64.powf(log_tau);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = psd(n, 0, &mut rng);
        let mut s = DMatrix::from_fn(n, q, |_, _| rng.random_range(-1.0..1.0));
        for mut c in s.column_iter_mut() {
            let norm = c.norm();
            c /= norm;
        }
        let block = StepBlock::new(from_na(&s), from_na(&(&g * &s)));
        let out = filter_steps(&block, tau, false);
        for (&c, &sigma) in out.kept_indices.iter().zip(&out.ldlt_of_dgd.sigma) {
            let sc = block.s_cols.col(c);
            prop_assert!(sigma >= tau * dot(sc, sc));
        }
        if out.is_empty() {
            return Ok(());
        }
        let m_bound = g.clone().symmetric_eigen().eigenvalues.max();
        let eta = tau.powi(q as i32) / ((q as f64).powi(q as i32) * m_bound.powi(q as i32 - 1));
        let d = to_na(&out.d_cols);
        let gap = d.transpose() * &g * &d - d.transpose() * &d * eta;
        let lowest = gap.symmetric_eigen().eigenvalues.min();
        prop_assert!(lowest >= -1e-12, "smallest eigenvalue {lowest:e}");
    }

    #[test]
    fn duplicates_and_flat_directions_are_dropped(n in 3usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = psd(n, 1, &mut rng);
        let eig = g.clone().symmetric_eigen();
        let (k, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| {
            if v.abs() < acc.1 { (i, v.abs()) } else { acc }
        });
        let flat = eig.eigenvectors.column(k).into_owned();
        let a = DMatrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        let mut s = DMatrix::zeros(n, 3);
        s.set_column(0, &a.column(0));
        s.set_column(1, &a.column(0));
        s.set_column(2, &flat);
        let block = StepBlock::new(from_na(&s), from_na(&(&g * &s)));
        let out = filter_steps(&block, 1e-12, false);
        prop_assert!(!out.kept_indices.contains(&1));
        prop_assert!(!out.kept_indices.contains(&2));
    }
}
