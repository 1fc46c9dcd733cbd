use crate::linalg::{DenseMatrix, SymMatrix};
use crate::oracle::Objective;

use super::dataset::SparseDataset;
use super::ProblemError;

/// Quadratic penalty `wᵀQw / 2m` added to a data term.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    Identity,
    Matrix(SymMatrix),
}

impl Regularizer {
    fn apply(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Regularizer::Identity => w.to_vec(),
            Regularizer::Matrix(q) => q.mul_vec(w),
        }
    }
}

/// Per-point loss as a function of the margin `z = xᵀw` and label `y`.
pub trait MarginLoss: Send + Sync {
    /// Returns `(ℓ, ∂ℓ/∂z, ∂²ℓ/∂z²)`.
    fn eval(&self, z: f64, y: f64) -> (f64, f64, f64);
}

/// `log(1 + e^z) − yz`, the negative log-likelihood of the logistic model.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLoss;

/// `1 − tanh(yz)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TanhLoss;

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl MarginLoss for LogisticLoss {
    fn eval(&self, z: f64, y: f64) -> (f64, f64, f64) {
        let p = sigmoid(z);
        (softplus(z) - y * z, p - y, p * (1.0 - p))
    }
}

impl MarginLoss for TanhLoss {
    fn eval(&self, z: f64, y: f64) -> (f64, f64, f64) {
        let t = (y * z).tanh();
        let sech2 = 1.0 - t * t;
        (1.0 - t, -y * sech2, 2.0 * y * y * t * sech2)
    }
}

/// `(1/m) Σ ℓ(xᵢᵀw, yᵢ) + wᵀQw / 2m` over a sparse dataset.
pub struct MarginObjective<L> {
    data: SparseDataset,
    reg: Regularizer,
    loss: L,
}

pub type LogisticObjective = MarginObjective<LogisticLoss>;
pub type TanhObjective = MarginObjective<TanhLoss>;

impl<L: MarginLoss> MarginObjective<L> {
    pub fn new(data: SparseDataset, reg: Regularizer, loss: L) -> Result<Self, ProblemError> {
        if let Regularizer::Matrix(q) = &reg {
            if q.dim() != data.n() {
                return Err(ProblemError::DimensionMismatch {
                    expected: data.n(),
                    found: q.dim(),
                });
            }
        }
        Ok(Self { data, reg, loss })
    }

    pub fn data(&self) -> &SparseDataset {
        &self.data
    }

    fn inv_m(&self) -> f64 {
        1.0 / self.data.m() as f64
    }
}

/// Regularized logistic regression.
pub fn logistic_oracle(data: SparseDataset, reg: Regularizer) -> Result<LogisticObjective, ProblemError> {
    MarginObjective::new(data, reg, LogisticLoss)
}

/// Tanh loss with an identity regularizer. Labels multiply the margin as
/// stored, so points labelled 0 contribute only the constant 1.
pub fn tanh_oracle(data: SparseDataset) -> TanhObjective {
    MarginObjective::new(data, Regularizer::Identity, TanhLoss).expect("identity regularizer fits any data")
}

impl<L: MarginLoss> Objective for MarginObjective<L> {
    fn dim(&self) -> usize {
        self.data.n()
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.value_and_gradient(w).0
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.value_and_gradient(w).1
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let inv_m = self.inv_m();
        let z = self.data.margins(w);
        let mut f = 0.0;
        let mut d1 = Vec::with_capacity(z.len());
        for (&zi, &yi) in z.iter().zip(self.data.labels()) {
            let (l, dl, _) = self.loss.eval(zi, yi);
            f += l;
            d1.push(dl);
        }
        let qw = self.reg.apply(w);
        let wqw: f64 = w.iter().zip(&qw).map(|(a, b)| a * b).sum();
        let mut g: Vec<f64> = qw.iter().map(|v| v * inv_m).collect();
        self.data.add_transpose_mul(&d1, inv_m, &mut g);
        (inv_m * (f + 0.5 * wqw), g)
    }

    fn hess_action(&self, w: &[f64], v: &DenseMatrix) -> DenseMatrix {
        let inv_m = self.inv_m();
        let z = self.data.margins(w);
        let d2: Vec<f64> = z
            .iter()
            .zip(self.data.labels())
            .map(|(&zi, &yi)| self.loss.eval(zi, yi).2)
            .collect();
        let mut out = DenseMatrix::zeros(self.dim(), v.cols());
        for j in 0..v.cols() {
            let vj = v.col(j);
            let u: Vec<f64> = self.data.margins(vj).iter().zip(&d2).map(|(a, b)| a * b).collect();
            let mut col: Vec<f64> = self.reg.apply(vj).iter().map(|t| t * inv_m).collect();
            self.data.add_transpose_mul(&u, inv_m, &mut col);
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_gradient, check_hess_action};
    use crate::problems::dataset::synthetic_dataset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data(m: usize, n: usize, seed: u64) -> SparseDataset {
        synthetic_dataset(m, n, 0.6, false, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn logistic_at_origin_is_log_two() {
        let f = logistic_oracle(data(7, 4, 1), Regularizer::Matrix(SymMatrix::identity(4))).unwrap();
        assert!((f.value(&[0.0; 4]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        let d = SparseDataset::new(1, vec![1.0, 0.0], vec![vec![(0, 1.0)], vec![(0, -1.0)]]).unwrap();
        let f = logistic_oracle(d, Regularizer::Identity).unwrap();
        for w in [700.0, -700.0, 1e4] {
            let (v, g) = f.value_and_gradient(&[w]);
            assert!(v.is_finite() && g[0].is_finite());
        }
    }

    #[test]
    fn logistic_derivatives_match_finite_differences() {
        let f = logistic_oracle(data(5, 3, 2), Regularizer::Identity).unwrap();
        let x = [0.3, -0.7, 1.1];
        assert!(check_gradient(&f, &x, 1e-5).unwrap() <= 1e-6);
        assert!(check_hess_action(&f, &x, &[1.0, 0.5, -2.0], 1e-5).unwrap() <= 1e-6);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = logistic_oracle(data(5, 3, 2), Regularizer::Matrix(SymMatrix::identity(4)));
        assert!(matches!(err, Err(ProblemError::DimensionMismatch { .. })));
    }

    #[test]
    fn tanh_values() {
        let f = tanh_oracle(data(6, 3, 3));
        assert_eq!(f.value(&[0.0; 3]), 1.0);
        let x = [0.4, -0.2, 0.9];
        assert!(check_gradient(&f, &x, 1e-5).unwrap() <= 1e-6);
        assert!(check_hess_action(&f, &x, &[0.3, 1.0, -0.5], 1e-5).unwrap() <= 1e-5);
    }

    #[test]
    fn tanh_with_zero_labels_is_pure_penalty() {
        let d = SparseDataset::new(2, vec![0.0, 0.0], vec![vec![(0, 1.0)], vec![(1, 3.0)]]).unwrap();
        let f = tanh_oracle(d);
        let w = [1.0, -2.0];
        assert!((f.value(&w) - (1.0 + 5.0 / 4.0)).abs() < 1e-15);
        assert_eq!(f.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
    }
}
