use super::{DenseMatrix, LinalgError, SymMatrix};

/// `A = L Σ Lᵀ` with `L` unit lower triangular and `Σ = diag(σ₁², …, σₙ²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LdltFactor {
    pub l: DenseMatrix,
    pub sigma: Vec<f64>,
}

impl LdltFactor {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.sigma.iter().all(|&s| s > 0.0 && s.is_finite())
    }

    /// Rebuilds `L Σ Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim();
        SymMatrix::from_fn(n, |i, j| {
            (0..=i.min(j))
                .map(|k| self.l.get(i, k) * self.sigma[k] * self.l.get(j, k))
                .sum()
        })
    }

    /// Solves `L Σ Lᵀ x = b` in place. Requires every pivot to be non-zero.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut v = b[i];
            for k in 0..i {
                v -= self.l.get(i, k) * b[k];
            }
            b[i] = v;
        }
        for (bi, s) in b.iter_mut().zip(&self.sigma) {
            *bi /= s;
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in i + 1..n {
                v -= self.l.get(k, i) * b[k];
            }
            b[i] = v;
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if b.rows() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: b.rows(),
            });
        }
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_in_place(x.col_mut(j));
        }
        Ok(x)
    }

    pub fn determinant(&self) -> f64 {
        self.sigma.iter().product()
    }
}

/// Unpivoted `LΣLᵀ` factorization that reports every pivot as computed,
/// including zero or negative ones.
///
/// Column order is preserved. When a pivot is exactly zero the entries of `L`
/// below it are set to zero, which leaves the remaining pivots equal to those of
/// the matrix with that column removed.
pub fn ldlt(a: &SymMatrix) -> LdltFactor {
    let n = a.dim();
    let mut l = DenseMatrix::identity(n);
    let mut sigma = vec![0.0; n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let ljk = l.get(j, k);
            d -= ljk * ljk * sigma[k];
        }
        sigma[j] = d;
        for i in j + 1..n {
            if d == 0.0 {
                l.set(i, j, 0.0);
                continue;
            }
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k) * sigma[k];
            }
            l.set(i, j, v / d);
        }
    }
    LdltFactor { l, sigma }
}

/// Strict variant: fails on the first pivot that is not strictly positive.
pub fn ldlt_spd(a: &SymMatrix) -> Result<LdltFactor, LinalgError> {
    let f = ldlt(a);
    if let Some((index, &pivot)) = f
        .sigma
        .iter()
        .enumerate()
        .find(|(_, &s)| !(s > 0.0 && s.is_finite()))
    {
        return Err(LinalgError::DegenerateFactor { index, pivot });
    }
    Ok(f)
}

fn strict_factor(a: &SymMatrix) -> Result<LdltFactor, LinalgError> {
    ldlt_spd(a).map_err(|e| match e {
        LinalgError::DegenerateFactor { index, pivot } => {
            LinalgError::NotPositiveDefinite { index, pivot }
        }
        other => other,
    })
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn solve_spd(a: &SymMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    strict_factor(a)?.solve(b)
}

pub fn solve_spd_vec(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    Ok(strict_factor(a)?.solve_vec(b))
}

/// Determinant of a symmetric positive definite matrix as the product of its pivots.
pub fn det_spd(a: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(strict_factor(a)?.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn diagonal_input_factors_trivially() {
        let f = ldlt(&SymMatrix::from_diagonal(&[4.0, 9.0]));
        assert_eq!(f.l, DenseMatrix::identity(2));
        assert_eq!(f.sigma, vec![4.0, 9.0]);
    }

    #[test]
    fn two_by_two_hand_elimination() {
        let f = ldlt(&SymMatrix::from_row_slice(2, &[4.0, 2.0, 2.0, 5.0]));
        assert_eq!(f.l.get(0, 0), 1.0);
        assert_eq!(f.l.get(0, 1), 0.0);
        assert_close(f.l.get(1, 0), 0.5);
        assert_eq!(f.l.get(1, 1), 1.0);
        assert_close(f.sigma[0], 4.0);
        assert_close(f.sigma[1], 4.0);
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = ldlt(&SymMatrix::identity(3));
        assert_eq!(f.l, DenseMatrix::identity(3));
        assert_eq!(f.sigma, vec![1.0; 3]);
    }

    #[test]
    fn raw_factor_reports_nonpositive_pivots() {
        let f = ldlt(&SymMatrix::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0]));
        assert_eq!(f.sigma, vec![1.0, 0.0]);
        let f = ldlt(&SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]));
        assert_eq!(f.sigma, vec![1.0, -3.0]);
        let err = ldlt_spd(&SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0])).unwrap_err();
        assert_eq!(err, LinalgError::DegenerateFactor { index: 1, pivot: -3.0 });
    }

    #[test]
    fn zero_pivot_does_not_poison_later_pivots() {
        // Second column duplicates the first; the third is independent.
        let a = SymMatrix::from_row_slice(3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let f = ldlt(&a);
        assert_eq!(f.sigma, vec![1.0, 0.0, 2.0]);
        assert!(f.l.is_finite());
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let b = DenseMatrix::from_row_slice(3, 2, &[1.0, -1.0, 2.0, 0.5, 3.0, 7.0]);
        assert_eq!(solve_spd(&SymMatrix::identity(3), &b).unwrap(), b);
        let x = solve_spd_vec(&SymMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn solve_rejects_indefinite() {
        let a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let err = solve_spd_vec(&a, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { index: 1, .. }));
        assert!(det_spd(&a).is_err());
    }

    #[test]
    fn determinants() {
        assert_eq!(det_spd(&SymMatrix::identity(4)).unwrap(), 1.0);
        assert_eq!(det_spd(&SymMatrix::from_diagonal(&[2.0, 3.0])).unwrap(), 6.0);
        assert_close(det_spd(&SymMatrix::from_row_slice(2, &[4.0, 2.0, 2.0, 5.0])).unwrap(), 16.0);
    }
}
