use crate::linalg::{dot, min_norm_solution, norm, null_space, DenseMatrix, LinalgError, SymMatrix};
use crate::oracle::{FnObjective, Objective};
use crate::solvers::{solve, Method, SolverConfig};

use super::ProblemError;

/// Barrier weight used throughout the benchmark suite.
pub const DEFAULT_MU: f64 = 1000.0;

/// `min ½xᵀQx + cᵀx  s.t.  Ax = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpStandardForm {
    pub q: SymMatrix,
    pub c: Vec<f64>,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
}

/// `F(y) = ½yᵀQ̄y + c̄ᵀy − μ Σ log(b̄ − Āy)ᵢ` on the open set `Āy < b̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierProblem {
    pub qbar: SymMatrix,
    pub cbar: Vec<f64>,
    pub abar: DenseMatrix,
    pub bbar: Vec<f64>,
    pub mu: f64,
}

impl BarrierProblem {
    pub fn dim(&self) -> usize {
        self.cbar.len()
    }

    /// Slacks `b̄ − Āy`.
    pub fn slacks(&self, y: &[f64]) -> Vec<f64> {
        let ay = self.abar.mul_vec(y);
        self.bbar.iter().zip(&ay).map(|(b, a)| b - a).collect()
    }

    pub fn in_domain(&self, y: &[f64]) -> bool {
        self.slacks(y).iter().all(|&s| s > 0.0)
    }

    /// For a reduced QP, the original variables `x = x₀ + Ny = b̄ − Āy`.
    pub fn recover_x(&self, y: &[f64]) -> Vec<f64> {
        self.slacks(y)
    }
}

/// Null-space reduction of a standard-form QP to an unconstrained barrier
/// problem in `y`, where `x = x₀ + Ny` with `N` an orthonormal basis of
/// `null(A)` and `x₀ > 0` feasible.
///
/// `x0` may be supplied; otherwise a strictly positive feasible point is
/// sought from the minimum-norm solution of `Ax = b`, improved if needed by
/// minimizing `Σ exp(−xᵢ)` over the affine set.
pub fn reduce_qp_to_barrier(qp: &QpStandardForm, x0: Option<&[f64]>, mu: f64) -> Result<BarrierProblem, ProblemError> {
    let (m, n) = qp.a.shape();
    if qp.q.dim() != n || qp.c.len() != n {
        return Err(ProblemError::DimensionMismatch {
            expected: n,
            found: if qp.q.dim() != n { qp.q.dim() } else { qp.c.len() },
        });
    }
    if qp.b.len() != m {
        return Err(ProblemError::DimensionMismatch {
            expected: m,
            found: qp.b.len(),
        });
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!("barrier weight must be positive, got {mu}")));
    }
    if m >= n {
        return Err(ProblemError::InvalidParameter(format!(
            "{m} constraints on {n} variables leave no free directions"
        )));
    }
    let basis = null_space(&qp.a).map_err(rank_error)?;
    let x0 = match x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(ProblemError::DimensionMismatch {
                    expected: n,
                    found: x0.len(),
                });
            }
            let residual: Vec<f64> = qp.a.mul_vec(x0).iter().zip(&qp.b).map(|(a, b)| a - b).collect();
            if norm(&residual) > 1e-8 * (1.0 + norm(&qp.b)) || x0.iter().any(|&v| !(v > 0.0)) {
                return Err(ProblemError::Infeasible);
            }
            x0.to_vec()
        }
        None => strictly_feasible_point(qp, &basis)?,
    };

    let qn = qp.q.mul_dense(&basis).expect("basis rows match Q");
    let qbar = SymMatrix::from_dense_symmetrized(&basis.tr_mul(&qn).expect("shapes agree")).expect("square");
    let shifted: Vec<f64> = qp.q.mul_vec(&x0).iter().zip(&qp.c).map(|(a, b)| a + b).collect();
    let cbar = basis.tr_mul_vec(&shifted);
    let mut abar = basis;
    abar.scale(-1.0);
    Ok(BarrierProblem {
        qbar,
        cbar,
        abar,
        bbar: x0,
        mu,
    })
}

fn rank_error(e: LinalgError) -> ProblemError {
    match e {
        LinalgError::RankDeficient { rank } => ProblemError::RankDeficient { rank },
        other => ProblemError::Linalg(other),
    }
}

fn strictly_feasible_point(qp: &QpStandardForm, basis: &DenseMatrix) -> Result<Vec<f64>, ProblemError> {
    let x_ls = min_norm_solution(&qp.a, &qp.b).map_err(rank_error)?;
    if x_ls.iter().all(|&v| v > 0.0) {
        return Ok(x_ls);
    }
    let n = x_ls.len();
    let s = basis.cols();
    let point = {
        let (x_ls, basis) = (x_ls.clone(), basis.clone());
        move |z: &[f64]| {
            let nz = basis.mul_vec(z);
            x_ls.iter().zip(&nz).map(|(a, b)| a + b).collect::<Vec<f64>>()
        }
    };
    let (p1, p2, p3) = (point.clone(), point.clone(), point.clone());
    let (b2, b3) = (basis.clone(), basis.clone());
    let phase_one = FnObjective::new(
        s,
        move |z| p1(z).iter().map(|v| (-v).exp()).sum(),
        move |z| {
            let w: Vec<f64> = p2(z).iter().map(|v| -(-v).exp()).collect();
            b2.tr_mul_vec(&w)
        },
        move |z, v| {
            let x = p3(z);
            let nv = b3.mul_vec(v);
            let w: Vec<f64> = x.iter().zip(&nv).map(|(xi, t)| (-xi).exp() * t).collect();
            b3.tr_mul_vec(&w)
        },
    );
    let cfg = SolverConfig::new(Method::Bfgs).with_grad_tol(1e-10).with_max_steps(2000);
    let trace = solve(&phase_one, &vec![0.0; s], &cfg).map_err(|_| ProblemError::Infeasible)?;
    let x = point(&trace.x_final);
    debug_assert_eq!(x.len(), n);
    if x.iter().all(|&v| v > 0.0 && v.is_finite()) {
        Ok(x)
    } else {
        Err(ProblemError::Infeasible)
    }
}

/// Barrier objective; `+∞` outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierObjective {
    problem: BarrierProblem,
}

pub fn barrier_oracle(problem: BarrierProblem) -> BarrierObjective {
    BarrierObjective { problem }
}

impl BarrierObjective {
    pub fn problem(&self) -> &BarrierProblem {
        &self.problem
    }
}

impl Objective for BarrierObjective {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, y: &[f64]) -> f64 {
        let p = &self.problem;
        let slacks = p.slacks(y);
        if slacks.iter().any(|&s| !(s > 0.0)) {
            return f64::INFINITY;
        }
        let logs: f64 = slacks.iter().map(|s| s.ln()).sum();
        0.5 * p.qbar.quad_form(y) + dot(&p.cbar, y) - p.mu * logs
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let p = &self.problem;
        let slacks = p.slacks(y);
        if slacks.iter().any(|&s| !(s > 0.0)) {
            return vec![f64::NAN; y.len()];
        }
        let r: Vec<f64> = slacks.iter().map(|s| p.mu / s).collect();
        let mut g = p.qbar.mul_vec(y);
        for ((gi, ci), ar) in g.iter_mut().zip(&p.cbar).zip(p.abar.tr_mul_vec(&r)) {
            *gi += ci + ar;
        }
        g
    }

    fn hess_action(&self, y: &[f64], v: &DenseMatrix) -> DenseMatrix {
        let p = &self.problem;
        let slacks = p.slacks(y);
        let mut av = p.abar.mul(v).expect("direction block has the problem's dimension");
        for j in 0..av.cols() {
            for (t, s) in av.col_mut(j).iter_mut().zip(&slacks) {
                *t *= p.mu / (s * s);
            }
        }
        let barrier = p.abar.tr_mul(&av).expect("shapes agree");
        p.qbar.mul_dense(v).expect("shapes agree").add(&barrier)
    }

    fn hessian(&self, y: &[f64]) -> Option<SymMatrix> {
        let p = &self.problem;
        let slacks = p.slacks(y);
        let (rows, cols) = p.abar.shape();
        Some(SymMatrix::from_fn(cols, |i, j| {
            p.qbar.get(i, j)
                + (0..rows)
                    .map(|k| p.mu * p.abar.get(k, i) * p.abar.get(k, j) / (slacks[k] * slacks[k]))
                    .sum::<f64>()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_gradient, check_hess_action};

    fn sum_constraint() -> QpStandardForm {
        QpStandardForm {
            q: SymMatrix::identity(2),
            c: vec![0.0, 0.0],
            a: DenseMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: vec![1.0],
        }
    }

    #[test]
    fn hand_reduction_of_sum_constraint() {
        let bp = reduce_qp_to_barrier(&sum_constraint(), Some(&[0.5, 0.5]), DEFAULT_MU).unwrap();
        assert_eq!(bp.dim(), 1);
        let n = [-bp.abar.get(0, 0), -bp.abar.get(1, 0)];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n[0].abs() - r).abs() < 1e-14 && (n[0] + n[1]).abs() < 1e-14);
        assert!((bp.qbar.get(0, 0) - 1.0).abs() < 1e-14);
        assert_eq!(bp.bbar, vec![0.5, 0.5]);
        let f = barrier_oracle(bp);
        let expected = -DEFAULT_MU * 2.0 * 0.5f64.ln();
        assert!((f.value(&[0.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn phase_one_finds_interior_point() {
        // The minimum-norm solution of x₁ − x₂ = 1.5, x₁ + x₂ + x₃ = 2 has x₂ < 0.
        let qp = QpStandardForm {
            q: SymMatrix::identity(3),
            c: vec![1.0, 0.0, -1.0],
            a: DenseMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 1.0, 1.0, 1.0]),
            b: vec![1.5, 2.0],
        };
        let x_ls = min_norm_solution(&qp.a, &qp.b).unwrap();
        assert!(x_ls.iter().any(|&v| v <= 0.0));
        let bp = reduce_qp_to_barrier(&qp, None, DEFAULT_MU).unwrap();
        assert!(bp.bbar.iter().all(|&v| v > 0.0));
        let ax = qp.a.mul_vec(&bp.recover_x(&[0.1]));
        assert!((ax[0] - 1.5).abs() < 1e-10 && (ax[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_and_rank_deficient_inputs() {
        let mut qp = sum_constraint();
        qp.b = vec![-1.0];
        assert_eq!(reduce_qp_to_barrier(&qp, None, DEFAULT_MU).unwrap_err(), ProblemError::Infeasible);
        assert_eq!(
            reduce_qp_to_barrier(&sum_constraint(), Some(&[1.0, 0.0]), DEFAULT_MU).unwrap_err(),
            ProblemError::Infeasible
        );
        let qp = QpStandardForm {
            q: SymMatrix::identity(3),
            c: vec![0.0; 3],
            a: DenseMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]),
            b: vec![1.0, 2.0],
        };
        assert!(matches!(
            reduce_qp_to_barrier(&qp, None, DEFAULT_MU),
            Err(ProblemError::RankDeficient { .. })
        ));
    }

    #[test]
    fn domain_is_encoded_in_value() {
        let bp = BarrierProblem {
            qbar: SymMatrix::zeros(1),
            cbar: vec![0.0],
            abar: DenseMatrix::from_row_slice(1, 1, &[-1.0]),
            bbar: vec![1.0],
            mu: 1.0,
        };
        let f = barrier_oracle(bp);
        assert!((f.value(&[1.0]) + 2f64.ln()).abs() < 1e-15);
        assert_eq!(f.value(&[-1.0]), f64::INFINITY);
        assert_eq!(f.value(&[-2.0]), f64::INFINITY);
        assert!(check_gradient(&f, &[0.5], 1e-6).unwrap() < 1e-6);
    }

    #[test]
    fn derivatives_at_centered_point() {
        let qp = QpStandardForm {
            q: SymMatrix::from_row_slice(3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0]),
            c: vec![1.0, -1.0, 0.5],
            a: DenseMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]),
            b: vec![3.0],
        };
        let f = barrier_oracle(reduce_qp_to_barrier(&qp, Some(&[1.0, 1.0, 1.0]), DEFAULT_MU).unwrap());
        let y = [0.1, -0.2];
        assert!(check_gradient(&f, &y, 1e-6).unwrap() < 1e-5);
        assert!(check_hess_action(&f, &y, &[1.0, 0.3], 1e-6).unwrap() < 1e-4);
        let hv = f.hess_vec(&y, &[1.0, 0.3]);
        let dense = f.hessian(&y).unwrap().mul_vec(&[1.0, 0.3]);
        assert!(hv.iter().zip(&dense).all(|(a, b)| (a - b).abs() < 1e-9 * (1.0 + b.abs())));
    }
}
