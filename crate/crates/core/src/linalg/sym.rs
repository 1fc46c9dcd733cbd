use super::{DenseMatrix, LinalgError};

/// Symmetric matrix with only the upper triangle stored (packed by columns).
///
/// Entry `(i, j)` with `i ≤ j` lives at `j(j+1)/2 + i`; the lower triangle is
/// never stored, so symmetry cannot drift.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, alpha: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, alpha);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a function evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for j in 0..dim {
            for i in 0..=j {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Symmetric part `(A + Aᵀ)/2` of a square dense matrix.
    pub fn from_dense_symmetrized(a: &DenseMatrix) -> Result<Self, LinalgError> {
        if a.rows() != a.cols() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        Ok(Self::from_fn(a.rows(), |i, j| 0.5 * (a.get(i, j) + a.get(j, i))))
    }

    /// Builds from a row-major full matrix, taking the upper triangle.
    pub fn from_row_slice(dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), dim * dim);
        Self::from_fn(dim, |i, j| values[i * dim + j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[packed_index(i, j)] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length must equal matrix dimension");
        let mut out = vec![0.0; self.dim];
        let mut k = 0;
        for j in 0..self.dim {
            let xj = x[j];
            let mut acc = 0.0;
            for i in 0..j {
                let a = self.data[k + i];
                out[i] += a * xj;
                acc += a * x[i];
            }
            let d = self.data[k + j];
            out[j] += acc + d * xj;
            k += j + 1;
        }
        out
    }

    pub fn mul_dense(&self, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if b.rows() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: b.rows(),
            });
        }
        let cols: Vec<Vec<f64>> = b.columns().map(|c| self.mul_vec(c)).collect();
        if cols.is_empty() {
            return Ok(DenseMatrix::zeros(self.dim, 0));
        }
        DenseMatrix::from_columns(&cols)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for j in 0..self.dim {
            for i in 0..=j {
                let v = self.get(i, j);
                sum += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        sum.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Quadratic form `xᵀAx`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        super::dot(x, &self.mul_vec(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_storage_is_symmetric() {
        let mut m = SymMatrix::zeros(3);
        m.set(2, 0, 5.0);
        assert_eq!(m.get(0, 2), 5.0);
        assert_eq!(m.get(2, 0), 5.0);
    }

    #[test]
    fn mul_vec_matches_dense() {
        let m = SymMatrix::from_row_slice(3, &[2.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 4.0]);
        let x = [1.0, -2.0, 0.5];
        let dense = m.to_dense().mul_vec(&x);
        assert_eq!(m.mul_vec(&x), dense);
        assert!((m.quad_form(&x) - super::super::dot(&x, &dense)).abs() < 1e-15);
    }

    #[test]
    fn frobenius_counts_off_diagonal_twice() {
        let m = SymMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!((m.frobenius_norm() - 10f64.sqrt()).abs() < 1e-15);
        assert!((m.to_dense().frobenius_norm() - m.frobenius_norm()).abs() < 1e-15);
    }
}
