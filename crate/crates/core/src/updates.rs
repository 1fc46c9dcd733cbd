//! Hessian-approximation updates.
//!
//! The block update makes the new approximation reproduce the true Hessian's
//! action on the retained step directions, `B⁺D = GD` (equivalently
//! `H⁺GD = D`). Solvers store the inverse `H`, so [`block_update_inverse`] is
//! the production path; [`block_update_direct`] exists for cross-checks.

use thiserror::Error;

use crate::linalg::{dot, ldlt, ldlt_spd, norm, DenseMatrix, LdltFactor, LinalgError, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpdateError {
    #[error("block matrix is not positive definite: {0}")]
    SingularBlock(LinalgError),
    #[error("block update needs at least one direction")]
    EmptyBlock,
    #[error("curvature condition violated: <y,s> = {0:e}")]
    CurvatureViolation(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Inverse Hessian approximation `H ≈ G⁻¹`, symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseApprox {
    h: SymMatrix,
}

impl InverseApprox {
    pub fn new(h: SymMatrix) -> Self {
        Self { h }
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        Self::new(SymMatrix::scaled_identity(n, scale))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.h
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.h
    }

    /// Quasi-Newton direction `−H g`.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut d = self.h.mul_vec(g);
        d.iter_mut().for_each(|v| *v = -*v);
        d
    }

    /// True when every pivot of the unpivoted factorization is positive.
    pub fn is_positive_definite(&self) -> bool {
        ldlt(&self.h).is_positive_definite()
    }
}

/// The steps of one block together with the Hessian action on them.
#[derive(Debug, Clone)]
pub struct StepBlock {
    /// Step vectors `s⁽¹⁾ … s⁽ᑫ⁾`, one per column.
    pub s_cols: DenseMatrix,
    /// Gradients at the block's iterates (diagnostic only; may have no columns).
    pub g_cols: DenseMatrix,
    /// `G·S`, the Hessian action at the block's final point.
    pub gs_cols: DenseMatrix,
    pub block_index: usize,
}

impl StepBlock {
    pub fn new(s_cols: DenseMatrix, gs_cols: DenseMatrix) -> Self {
        assert_eq!(s_cols.shape(), gs_cols.shape(), "S and GS must have the same shape");
        let g_cols = DenseMatrix::zeros(s_cols.rows(), 0);
        Self {
            s_cols,
            g_cols,
            gs_cols,
            block_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.s_cols.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Directions retained for an update, with the factorization of `DᵀGD`.
#[derive(Debug, Clone)]
pub struct FilterResult {
    /// Indices into the block's columns, in their original order.
    pub kept_indices: Vec<usize>,
    pub d_cols: DenseMatrix,
    pub gd_cols: DenseMatrix,
    /// `DᵀGD` restricted to the kept columns.
    pub dgd: SymMatrix,
    pub ldlt_of_dgd: LdltFactor,
}

impl FilterResult {
    pub fn len(&self) -> usize {
        self.kept_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept_indices.is_empty()
    }
}

fn curvature_matrix(block: &StepBlock) -> SymMatrix {
    let raw = block
        .s_cols
        .tr_mul(&block.gs_cols)
        .expect("S and GS have the same number of rows");
    SymMatrix::from_dense_symmetrized(&raw).expect("SᵀGS is square")
}

fn restrict(block: &StepBlock, full: &SymMatrix, kept: Vec<usize>, factor: LdltFactor) -> FilterResult {
    let dgd = SymMatrix::from_fn(kept.len(), |a, b| full.get(kept[a], kept[b]));
    FilterResult {
        d_cols: block.s_cols.select_columns(&kept),
        gd_cols: block.gs_cols.select_columns(&kept),
        dgd,
        ldlt_of_dgd: factor,
        kept_indices: kept,
    }
}

/// Selects the columns of a block whose `LΣLᵀ` pivots of `SᵀGS` satisfy
/// `σᵢ² ≥ τ‖sᵢ‖²`.
///
/// Columns are considered in order and the factorization is built
/// incrementally over the survivors; a rejected column contributes nothing to
/// later pivots. With `always_keep_first` the block's first column is kept
/// without the threshold test (it still needs a positive pivot). A pivot must
/// always be strictly positive, so zero steps are dropped even though
/// `0 ≥ τ·0`. No Hessian actions are evaluated here: `DᵀGD` comes from
/// `s_colsᵀ·gs_cols`.
pub fn filter_steps(block: &StepBlock, tau: f64, always_keep_first: bool) -> FilterResult {
    assert!(tau > 0.0, "filter threshold must be positive");
    let full = curvature_matrix(block);
    let q = block.len();

    let mut kept: Vec<usize> = Vec::with_capacity(q);
    // rows[a][b] = L entry for kept column a against kept column b (b < a).
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut sigma: Vec<f64> = Vec::with_capacity(q);

    for c in 0..q {
        let mut row = Vec::with_capacity(kept.len());
        for (b, &kb) in kept.iter().enumerate() {
            let mut v = full.get(c, kb);
            for t in 0..b {
                v -= rows[b][t] * row[t] * sigma[t];
            }
            row.push(v / sigma[b]);
        }
        let pivot = full.get(c, c) - row.iter().zip(&sigma).map(|(l, s)| l * l * s).sum::<f64>();
        let s_norm_sq = dot(block.s_cols.col(c), block.s_cols.col(c));
        let passes = if c == 0 && always_keep_first {
            true
        } else {
            pivot >= tau * s_norm_sq
        };
        if passes && pivot > 0.0 && pivot.is_finite() {
            kept.push(c);
            rows.push(row);
            sigma.push(pivot);
        }
    }

    let k = kept.len();
    let l = DenseMatrix::from_fn(k, k, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => rows[i][j],
        std::cmp::Ordering::Less => 0.0,
    });
    restrict(block, &full, kept, LdltFactor { l, sigma })
}

/// Keeps every column of the block, without any threshold.
///
/// The factorization is the raw one; if `DᵀGD` is not positive definite the
/// subsequent update reports [`UpdateError::SingularBlock`].
pub fn all_steps(block: &StepBlock) -> FilterResult {
    let full = curvature_matrix(block);
    let factor = ldlt(&full);
    restrict(block, &full, (0..block.len()).collect(), factor)
}

fn check_block(filt: &FilterResult, n: usize) -> Result<(), UpdateError> {
    if filt.is_empty() {
        return Err(UpdateError::EmptyBlock);
    }
    if filt.d_cols.rows() != n {
        return Err(UpdateError::DimensionMismatch {
            expected: n,
            found: filt.d_cols.rows(),
        });
    }
    if let Some((index, &pivot)) = filt
        .ldlt_of_dgd
        .sigma
        .iter()
        .enumerate()
        .find(|(_, &s)| !(s > 0.0 && s.is_finite()))
    {
        return Err(UpdateError::SingularBlock(LinalgError::NotPositiveDefinite { index, pivot }));
    }
    Ok(())
}

/// Block BFGS inverse update
///
/// `H⁺ = D M⁻¹ Dᵀ + (I − D M⁻¹ Yᵀ) H (I − Y M⁻¹ Dᵀ)` with `Y = GD`, `M = DᵀGD`.
///
/// Expanded with `W = HY` and `P = M⁻¹Dᵀ` this is
/// `H − PᵀWᵀ − WP + Pᵀ(YᵀHY + M)P`, evaluated on the upper triangle only.
pub fn block_update_inverse(h: &InverseApprox, filt: &FilterResult) -> Result<InverseApprox, UpdateError> {
    let n = h.dim();
    check_block(filt, n)?;
    let q = filt.len();
    let y = &filt.gd_cols;
    let w = h.h.mul_dense(y).map_err(UpdateError::SingularBlock)?;
    let p = filt
        .ldlt_of_dgd
        .solve(&filt.d_cols.transpose())
        .map_err(UpdateError::SingularBlock)?;
    let ytw = y.tr_mul(&w).map_err(UpdateError::SingularBlock)?;
    let c = SymMatrix::from_fn(q, |a, b| 0.5 * (ytw.get(a, b) + ytw.get(b, a)) + filt.dgd.get(a, b));
    let cp = c.mul_dense(&p).map_err(UpdateError::SingularBlock)?;

    let out = SymMatrix::from_fn(n, |i, j| {
        let mut v = h.h.get(i, j);
        for a in 0..q {
            v += -p.get(a, i) * w.get(j, a) - w.get(i, a) * p.get(a, j) + p.get(a, i) * cp.get(a, j);
        }
        v
    });
    Ok(InverseApprox::new(out))
}

/// Block BFGS direct update `B⁺ = B − BD(DᵀBD)⁻¹DᵀB + GD(DᵀGD)⁻¹DᵀG`.
///
/// Not used by the solvers; it provides an independent route for checking
/// the inverse update.
pub fn block_update_direct(b: &SymMatrix, filt: &FilterResult) -> Result<SymMatrix, UpdateError> {
    let n = b.dim();
    check_block(filt, n)?;
    let d = &filt.d_cols;
    let y = &filt.gd_cols;
    let bd = b.mul_dense(d).map_err(UpdateError::SingularBlock)?;
    let dbd = SymMatrix::from_dense_symmetrized(&d.tr_mul(&bd).map_err(UpdateError::SingularBlock)?)
        .map_err(UpdateError::SingularBlock)?;
    let dbd_factor = ldlt_spd(&dbd).map_err(UpdateError::SingularBlock)?;
    let k1 = dbd_factor.solve(&bd.transpose()).map_err(UpdateError::SingularBlock)?;
    let k2 = filt.ldlt_of_dgd.solve(&y.transpose()).map_err(UpdateError::SingularBlock)?;
    let q = filt.len();
    Ok(SymMatrix::from_fn(n, |i, j| {
        let mut v = b.get(i, j);
        for a in 0..q {
            v += -0.5 * (bd.get(i, a) * k1.get(a, j) + bd.get(j, a) * k1.get(a, i))
                + 0.5 * (y.get(i, a) * k2.get(a, j) + y.get(j, a) * k2.get(a, i));
        }
        v
    }))
}

/// Classical BFGS inverse update `H⁺ = (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`, `ρ = 1/⟨y,s⟩`.
pub fn secant_update(h: &InverseApprox, s: &[f64], y: &[f64]) -> Result<InverseApprox, UpdateError> {
    let n = h.dim();
    for v in [s, y] {
        if v.len() != n {
            return Err(UpdateError::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    let ys = dot(y, s);
    if !(ys > 0.0 && ys.is_finite()) {
        return Err(UpdateError::CurvatureViolation(ys));
    }
    let rho = 1.0 / ys;
    let hy = h.h.mul_vec(y);
    let coef = rho * rho * dot(y, &hy) + rho;
    let out = SymMatrix::from_fn(n, |i, j| {
        h.h.get(i, j) - rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j]
    });
    Ok(InverseApprox::new(out))
}

/// Cautious-update test `⟨y,s⟩/‖s‖² ≥ ε‖g‖^exponent`.
pub fn cautious_gate(s: &[f64], y: &[f64], g: &[f64], eps: f64, exponent: f64) -> bool {
    let ss = dot(s, s);
    debug_assert!(ss > 0.0, "cautious gate needs a non-zero step");
    dot(y, s) / ss >= eps * norm(g).powf(exponent)
}

/// Modified secant vector `z = y + r s` with `r = max(0, ε − ⟨y,s⟩/‖s‖²)`,
/// so that `⟨z,s⟩ ≥ ε‖s‖²`.
pub fn li_fukushima_modify(s: &[f64], y: &[f64], eps: f64) -> Vec<f64> {
    let ss = dot(s, s);
    let r = (eps - dot(y, s) / ss).max(0.0);
    y.iter().zip(s).map(|(yi, si)| yi + r * si).collect()
}

/// Result of Powell damping.
#[derive(Debug, Clone, PartialEq)]
pub struct PowellDamping {
    pub z: Vec<f64>,
    pub theta: f64,
    /// `⟨z, s⟩` of the damped vector.
    pub zs: f64,
    /// `sᵀBs`.
    pub sbs: f64,
}

/// Powell's damped secant vector `z = θy + (1−θ)Bs`, guaranteeing
/// `zᵀs ≥ φ·sᵀBs`.
pub fn powell_damp(s: &[f64], y: &[f64], b_action_s: &[f64], phi: f64) -> PowellDamping {
    debug_assert!(phi > 0.0 && phi < 1.0);
    let sbs = dot(s, b_action_s);
    let ys = dot(y, s);
    let theta = if ys >= phi * sbs {
        1.0
    } else {
        (1.0 - phi) * sbs / (sbs - ys)
    };
    let z: Vec<f64> = y
        .iter()
        .zip(b_action_s)
        .map(|(yi, bi)| theta * yi + (1.0 - theta) * bi)
        .collect();
    let zs = dot(&z, s);
    PowellDamping { z, theta, zs, sbs }
}
