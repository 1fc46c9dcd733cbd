use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{dot, orthonormal_factor, solve_spd_vec, DenseMatrix, LinalgError, SymMatrix};
use crate::oracle::Objective;

/// `f(x) = ½xᵀAx − bᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    a: SymMatrix,
    b: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(a: SymMatrix, b: Vec<f64>) -> Self {
        assert_eq!(a.dim(), b.len(), "quadratic term and linear term disagree in size");
        Self { a, b }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    /// `A⁻¹b` by direct solve.
    pub fn minimizer(&self) -> Result<Vec<f64>, LinalgError> {
        solve_spd_vec(&self.a, &self.b)
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.a.quad_form(x) - dot(&self.b, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.a.mul_vec(x);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }

    fn hess_action(&self, _x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        self.a.mul_dense(v).expect("direction block has the objective's dimension")
    }

    fn hessian(&self, _x: &[f64]) -> Option<SymMatrix> {
        Some(self.a.clone())
    }
}

/// Random orthogonal `n×n` matrix (Q factor of a Gaussian matrix).
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    loop {
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        if let Ok(q) = orthonormal_factor(&g) {
            return q;
        }
    }
}

/// `VΛVᵀ` with eigenvalues spaced geometrically from `1/cond` to 1 and a
/// random orthogonal `V`.
pub fn random_spd<R: Rng>(n: usize, cond: f64, rng: &mut R) -> SymMatrix {
    let v = random_orthogonal(n, rng);
    let lambda: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64 - 1.0)
            }
        })
        .collect();
    SymMatrix::from_fn(n, |i, j| (0..n).map(|k| v.get(i, k) * lambda[k] * v.get(j, k)).sum())
}
