use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::ProblemError;

/// Sparse feature vector: `(index, value)` pairs with strictly increasing
/// 0-based indices.
pub type SparseRow = Vec<(usize, f64)>;

/// Labelled points for binary classification, labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    n_features: usize,
    labels: Vec<f64>,
    rows: Vec<SparseRow>,
}

impl SparseDataset {
    pub fn new(n_features: usize, labels: Vec<f64>, rows: Vec<SparseRow>) -> Result<Self, ProblemError> {
        if labels.len() != rows.len() {
            return Err(ProblemError::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if rows.is_empty() {
            return Err(ProblemError::EmptyDataset);
        }
        for (r, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(ProblemError::Parse {
                    line: r + 1,
                    message: "feature indices must be strictly increasing".into(),
                });
            }
            if let Some(&(j, _)) = row.last() {
                if j >= n_features {
                    return Err(ProblemError::DimensionMismatch {
                        expected: n_features,
                        found: j + 1,
                    });
                }
            }
        }
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(ProblemError::Parse {
                line: 0,
                message: "labels must be 0 or 1".into(),
            });
        }
        Ok(Self {
            n_features,
            labels,
            rows,
        })
    }

    /// Number of points.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.n_features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    /// `xᵢᵀw` for every row.
    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| sparse_dot(r, w)).collect()
    }

    /// `Xᵀu` accumulated into `out`, scaled by `alpha`.
    pub fn add_transpose_mul(&self, u: &[f64], alpha: f64, out: &mut [f64]) {
        for (row, &ui) in self.rows.iter().zip(u) {
            if ui == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += alpha * ui * v;
            }
        }
    }
}

pub fn sparse_dot(row: &[(usize, f64)], w: &[f64]) -> f64 {
    row.iter().map(|&(j, v)| v * w[j]).sum()
}

/// Parses LIBSVM text: one point per line, `label idx:val idx:val …` with
/// 1-based, strictly increasing indices.
///
/// A two-label alphabet is remapped so the smaller label becomes 0 and the
/// larger 1; labels already in `{0, 1}` are kept. The feature count is the
/// largest index seen unless `n_features` is given.
pub fn parse_libsvm_str(text: &str, n_features: Option<usize>) -> Result<SparseDataset, ProblemError> {
    let mut raw_labels = Vec::new();
    let mut rows = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ProblemError::Parse { line: line_no, message };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("invalid label '{label_tok}'")))?;
        if !label.is_finite() {
            return Err(err(format!("invalid label '{label_tok}'")));
        }
        let mut row: SparseRow = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, found '{tok}'")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("invalid index '{idx}'")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("invalid value '{val}'")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value '{val}'")));
            }
            if let Some(&(prev, _)) = row.last() {
                if idx - 1 <= prev {
                    return Err(err("feature indices must be strictly increasing".into()));
                }
            }
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        raw_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ProblemError::EmptyDataset);
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(ProblemError::DimensionMismatch {
                expected: n,
                found: max_index,
            })
        }
        Some(n) => n,
        None => max_index,
    };
    let labels = remap_labels(&raw_labels)?;
    SparseDataset::new(n, labels, rows)
}

pub fn parse_libsvm(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<SparseDataset, ProblemError> {
    let text = fs::read_to_string(path.as_ref()).map_err(|e| ProblemError::Io(e.to_string()))?;
    parse_libsvm_str(&text, n_features)
}

fn remap_labels(raw: &[f64]) -> Result<Vec<f64>, ProblemError> {
    let distinct: BTreeSet<u64> = raw.iter().map(|v| ordered_bits(*v)).collect();
    if raw.iter().all(|&y| y == 0.0 || y == 1.0) {
        return Ok(raw.iter().map(|&y| if y == 1.0 { 1.0 } else { 0.0 }).collect());
    }
    match distinct.len() {
        1 => Ok(raw.iter().map(|&y| if y > 0.0 { 1.0 } else { 0.0 }).collect()),
        2 => {
            let smallest = raw.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(raw.iter().map(|&y| if y == smallest { 0.0 } else { 1.0 }).collect())
        }
        k => Err(ProblemError::MultiClass(k)),
    }
}

// Total order key for finite floats (distinguishes -0.0 only by value).
fn ordered_bits(v: f64) -> u64 {
    let v = if v == 0.0 { 0.0 } else { v };
    v.to_bits()
}

/// Random sparse binary classification data.
///
/// Features are standard normal with the given density. Separable data is
/// labelled by the sign of `xᵀw*`; otherwise labels are drawn from the
/// logistic model `P(y=1) = σ(xᵀw*)`.
pub fn synthetic_dataset<R: Rng>(m: usize, n: usize, density: f64, separable: bool, rng: &mut R) -> SparseDataset {
    let w_true: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row: SparseRow = Vec::new();
        for j in 0..n {
            if rng.random::<f64>() < density {
                row.push((j, rng.sample::<f64, _>(StandardNormal)));
            }
        }
        if row.is_empty() {
            let j = rng.random_range(0..n);
            row.push((j, rng.sample::<f64, _>(StandardNormal)));
        }
        let z = sparse_dot(&row, &w_true);
        let y = if separable {
            f64::from(z > 0.0)
        } else {
            f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-z).exp()))
        };
        rows.push(row);
        labels.push(y);
    }
    SparseDataset::new(n, labels, rows).expect("generated data is well formed")
}
