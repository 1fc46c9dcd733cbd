use super::{dot, DenseMatrix, LinalgError};
use crate::tol;

/// Householder QR of a tall or square matrix `A = Q R` (rows ≥ cols).
#[derive(Clone, Debug)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    // Unit reflector vectors, one per column; entries above the pivot are zero.
    reflectors: Vec<Vec<f64>>,
    r: DenseMatrix,
}

impl HouseholderQr {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        let (rows, cols) = a.shape();
        if rows < cols {
            return Err(LinalgError::DimensionMismatch {
                expected: cols,
                found: rows,
            });
        }
        let mut r = a.clone();
        let mut reflectors = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut v: Vec<f64> = (0..rows).map(|i| if i < k { 0.0 } else { r.get(i, k) }).collect();
            let alpha = -v[k].signum_nonzero() * v[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
            v[k] -= alpha;
            let vnorm = dot(&v, &v).sqrt();
            if vnorm > 0.0 {
                v.iter_mut().for_each(|x| *x /= vnorm);
                for j in k..cols {
                    let c = r.col_mut(j);
                    let proj = 2.0 * dot(&v, c);
                    for (ci, vi) in c.iter_mut().zip(&v) {
                        *ci -= proj * vi;
                    }
                }
            }
            reflectors.push(v);
        }
        Ok(Self {
            rows,
            cols,
            reflectors,
            r,
        })
    }

    /// Applies `Q` to a vector of length `rows`.
    pub fn apply_q(&self, x: &mut [f64]) {
        for v in self.reflectors.iter().rev() {
            let proj = 2.0 * dot(v, x);
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi -= proj * vi;
            }
        }
    }

    /// The full orthogonal factor, `rows × rows`.
    pub fn q_full(&self) -> DenseMatrix {
        let mut q = DenseMatrix::identity(self.rows);
        for j in 0..self.rows {
            self.apply_q(q.col_mut(j));
        }
        q
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.cols).map(|i| self.r.get(i, i)).collect()
    }

    pub fn r(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.cols, |i, j| if i <= j { self.r.get(i, j) } else { 0.0 })
    }

    fn check_rank(&self) -> Result<(), LinalgError> {
        let diag = self.r_diagonal();
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if scale == 0.0 {
            return Err(LinalgError::RankDeficient { rank: 0 });
        }
        let rank = diag.iter().filter(|d| d.abs() > tol::RANK * scale).count();
        if rank < self.cols {
            return Err(LinalgError::RankDeficient { rank });
        }
        Ok(())
    }
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Orthonormal basis of the null space of a wide matrix `A` (rows < cols)
/// with full row rank.
pub fn null_space(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let (m, n) = a.shape();
    if m > n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: m });
    }
    let qr = HouseholderQr::new(&a.transpose())?;
    qr.check_rank()?;
    let q = qr.q_full();
    let idx: Vec<usize> = (m..n).collect();
    Ok(q.select_columns(&idx))
}

/// Minimum-norm solution of `A x = b` for a wide matrix with full row rank.
pub fn min_norm_solution(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(LinalgError::DimensionMismatch { expected: m, found: b.len() });
    }
    // Aᵀ = Q [R; 0], so A = Rᵀ Q₁ᵀ and x = Q₁ R⁻ᵀ b.
    let qr = HouseholderQr::new(&a.transpose())?;
    qr.check_rank()?;
    let r = qr.r();
    let mut z = vec![0.0; n];
    for i in 0..m {
        let mut v = b[i];
        for k in 0..i {
            v -= r.get(k, i) * z[k];
        }
        z[i] = v / r.get(i, i);
    }
    qr.apply_q(&mut z);
    Ok(z)
}

/// Orthonormalizes the columns of a square matrix (the `Q` of its QR factorization,
/// with signs fixed so `R` has a positive diagonal).
pub fn orthonormal_factor(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let qr = HouseholderQr::new(a)?;
    let mut q = qr.q_full();
    for (j, d) in qr.r_diagonal().into_iter().enumerate() {
        if d < 0.0 {
            q.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_single_sum_constraint() {
        let a = DenseMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let n = null_space(&a).unwrap();
        assert_eq!(n.shape(), (2, 1));
        let c = n.col(0);
        assert!((c[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((c[0] + c[1]).abs() < 1e-14);
    }

    #[test]
    fn null_space_detects_rank_deficiency() {
        let a = DenseMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(null_space(&a), Err(LinalgError::RankDeficient { rank: 1 })));
    }

    #[test]
    fn min_norm_solution_satisfies_system() {
        let a = DenseMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.0, 1.0, 3.0, 1.0]);
        let b = [1.0, 2.0];
        let x = min_norm_solution(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        assert!((ax[0] - 1.0).abs() < 1e-13 && (ax[1] - 2.0).abs() < 1e-13);
        // Minimum norm means x lies in the row space, i.e. orthogonal to the null space.
        let n = null_space(&a).unwrap();
        for c in n.columns() {
            assert!(dot(c, &x).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_factor_is_orthogonal() {
        let a = DenseMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.3, 1.0, 4.0, 2.0, 0.5, 0.1, -3.0]);
        let q = orthonormal_factor(&a).unwrap();
        let qtq = q.tr_mul(&q).unwrap();
        assert!(qtq.sub(&DenseMatrix::identity(3)).frobenius_norm() < 1e-14);
    }
}
