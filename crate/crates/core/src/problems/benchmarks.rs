//! Standard unconstrained test functions.
//!
//! Each function is written as a sum of element functions of a few
//! variables. An element reports its value, gradient and Hessian entries, and
//! the objective assembles them, so the derivatives of every function come
//! from one generic chain rule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::oracle::Objective;

use super::ProblemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkFunction {
    /// `Σ_{i<n} (−4xᵢ + 3) + (xᵢ² + xₙ²)²`, start `1`.
    Arwhead,
    /// `Σ_{i≤n−4} (−4xᵢ + 3)² + (xᵢ² + 2xᵢ₊₁² + 3xᵢ₊₂² + 4xᵢ₊₃² + 5xₙ²)²`, start `1`.
    Bdqrtic,
    /// `(x₁ − 1)² + Σ_{i≥2} 100(xᵢ − xᵢ₋₁³)²`, start `(−1.2, 1, −1.2, …)`.
    Cube,
    /// `(x₁ − 1)² + Σ_{i≥2} i(2xᵢ² − xᵢ₋₁)²`, start `1`.
    DixonPrice,
    /// `16 + Σ_{i<n} (xᵢ − 2)⁴ + (xᵢxᵢ₊₁ − 2xᵢ₊₁)² + (xᵢ₊₁ + 1)²`, start `0`.
    Edensch,
    /// `Σ_{i<n} sin(x₁ + xᵢ² − 1) + ½ sin(xₙ²)`, start `1`.
    Eg2,
    /// `Σ_{i<n} 100(xᵢ₊₁ − xᵢ + 1 − xᵢ²)²`, start `0`.
    Fletchcr,
    /// `Σ (i/10)(exp(xᵢ) − xᵢ)`, start `1`.
    Raydan1,
    /// `Σ_{i≤n/2} 100(x₂ᵢ − x₂ᵢ₋₁²)² + (1 − x₂ᵢ₋₁)²`, start `(−1.2, 1, −1.2, …)`.
    Rosenbrock,
    /// `(x₁ − 1)⁴ + Σ_{1<i<n} (sin(xᵢ − xₙ) − x₁² + xᵢ²)² + (xₙ² − x₁²)²`, start `0.1`.
    Sinquad,
    /// `Σ_{i≤n−2} (10/(n+2) + xᵢ₊₂²)(2 − exp(−(xᵢ − xᵢ₊₁)² / (0.1 + xᵢ₊₂²)))`, start `3`.
    Tointgss,
    /// `Σ (xᵢ − 1)² − Σ_{i≥2} xᵢxᵢ₋₁`, start `1`.
    Trid,
    /// `Σ xᵢ⁴ − xᵢ²`, start `0.1`.
    DoubleWell,
}

impl BenchmarkFunction {
    pub const ALL: [BenchmarkFunction; 13] = [
        Self::Arwhead,
        Self::Bdqrtic,
        Self::Cube,
        Self::DixonPrice,
        Self::Edensch,
        Self::Eg2,
        Self::Fletchcr,
        Self::Raydan1,
        Self::Rosenbrock,
        Self::Sinquad,
        Self::Tointgss,
        Self::Trid,
        Self::DoubleWell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Arwhead => "arwhead",
            Self::Bdqrtic => "bdqrtic",
            Self::Cube => "cube",
            Self::DixonPrice => "dixonprice",
            Self::Edensch => "edensch",
            Self::Eg2 => "eg2",
            Self::Fletchcr => "fletchcr",
            Self::Raydan1 => "raydan1",
            Self::Rosenbrock => "rosenbrock",
            Self::Sinquad => "sinquad",
            Self::Tointgss => "tointgss",
            Self::Trid => "trid",
            Self::DoubleWell => "double_well",
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            Self::Raydan1 | Self::DoubleWell => 1,
            Self::Bdqrtic => 5,
            Self::Sinquad | Self::Tointgss => 3,
            _ => 2,
        }
    }

    pub fn accepts_dim(self, n: usize) -> bool {
        n >= self.min_dim() && (self != Self::Rosenbrock || n % 2 == 0)
    }

    pub fn standard_start(self, n: usize) -> Vec<f64> {
        let alternating = |i: usize| if i % 2 == 0 { -1.2 } else { 1.0 };
        (0..n)
            .map(|i| match self {
                Self::Cube | Self::Rosenbrock => alternating(i),
                Self::Edensch | Self::Fletchcr => 0.0,
                Self::Sinquad | Self::DoubleWell => 0.1,
                Self::Tointgss => 3.0,
                _ => 1.0,
            })
            .collect()
    }

    /// Global minimum value where it is known in closed form.
    pub fn known_minimum(self, n: usize) -> Option<f64> {
        let nf = n as f64;
        match self {
            Self::Arwhead | Self::Cube | Self::DixonPrice | Self::Fletchcr | Self::Rosenbrock => Some(0.0),
            Self::Trid => Some(-nf * (nf + 4.0) * (nf - 1.0) / 6.0),
            Self::DoubleWell => Some(-0.25 * nf),
            _ => None,
        }
    }
}

impl fmt::Display for BenchmarkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkFunction {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key || (key == "x4_x2" && *f == Self::DoubleWell))
            .ok_or_else(|| ProblemError::UnknownFunction(s.to_string()))
    }
}

/// One element: value, sparse gradient and upper-triangle Hessian entries.
#[derive(Debug, Default)]
struct Element {
    value: f64,
    grad: Vec<(usize, f64)>,
    hess: Vec<(usize, usize, f64)>,
}

/// Sparse derivatives of an inner function `u`; indices must be distinct.
struct Inner<'a> {
    grad: &'a [(usize, f64)],
    hess: &'a [(usize, usize, f64)],
}

/// `φ(u)` given `(φ, φ′, φ″)` at `u`.
fn compose((phi, d1, d2): (f64, f64, f64), u: Inner<'_>) -> Element {
    let mut e = Element {
        value: phi,
        grad: u.grad.iter().map(|&(i, g)| (i, d1 * g)).collect(),
        hess: u.hess.iter().map(|&(i, j, h)| (i, j, d1 * h)).collect(),
    };
    if d2 != 0.0 {
        for (a, &(i, gi)) in u.grad.iter().enumerate() {
            for &(j, gj) in &u.grad[a..] {
                e.hess.push((i, j, d2 * gi * gj));
            }
        }
    }
    e
}

fn square(c: f64, u: f64) -> (f64, f64, f64) {
    (c * u * u, 2.0 * c * u, 2.0 * c)
}

fn fourth(u: f64) -> (f64, f64, f64) {
    (u.powi(4), 4.0 * u.powi(3), 12.0 * u * u)
}

fn linear(u: f64) -> (f64, f64, f64) {
    (u, 1.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkObjective {
    function: BenchmarkFunction,
    n: usize,
}

/// The named test function in dimension `n`.
pub fn benchmark_oracle(function: BenchmarkFunction, n: usize) -> Result<BenchmarkObjective, ProblemError> {
    if !function.accepts_dim(n) {
        return Err(ProblemError::BadDimension {
            function: function.name().to_string(),
            n,
        });
    }
    Ok(BenchmarkObjective { function, n })
}

impl BenchmarkObjective {
    pub fn function(&self) -> BenchmarkFunction {
        self.function
    }

    fn elements(&self, x: &[f64]) -> (f64, Vec<Element>) {
        use BenchmarkFunction::*;
        let n = self.n;
        let last = n - 1;
        let mut out = Vec::new();
        let mut constant = 0.0;
        match self.function {
            Arwhead => {
                for i in 0..last {
                    out.push(compose(linear(3.0 - 4.0 * x[i]), Inner { grad: &[(i, -4.0)], hess: &[] }));
                    let u = x[i] * x[i] + x[last] * x[last];
                    out.push(compose(
                        square(1.0, u),
                        Inner {
                            grad: &[(i, 2.0 * x[i]), (last, 2.0 * x[last])],
                            hess: &[(i, i, 2.0), (last, last, 2.0)],
                        },
                    ));
                }
            }
            Bdqrtic => {
                for i in 0..n - 4 {
                    let u = 3.0 - 4.0 * x[i];
                    out.push(compose(square(1.0, u), Inner { grad: &[(i, -4.0)], hess: &[] }));
                    let mut grad = Vec::with_capacity(5);
                    let mut hess = Vec::with_capacity(5);
                    let mut w = 0.0;
                    for (c, j) in [(1.0, i), (2.0, i + 1), (3.0, i + 2), (4.0, i + 3), (5.0, last)] {
                        w += c * x[j] * x[j];
                        grad.push((j, 2.0 * c * x[j]));
                        hess.push((j, j, 2.0 * c));
                    }
                    out.push(compose(square(1.0, w), Inner { grad: &grad, hess: &hess }));
                }
            }
            Cube => {
                let u = x[0] - 1.0;
                out.push(compose(square(1.0, u), Inner { grad: &[(0, 1.0)], hess: &[] }));
                for i in 1..n {
                    let p = x[i - 1];
                    let u = x[i] - p * p * p;
                    out.push(compose(
                        square(100.0, u),
                        Inner {
                            grad: &[(i - 1, -3.0 * p * p), (i, 1.0)],
                            hess: &[(i - 1, i - 1, -6.0 * p)],
                        },
                    ));
                }
            }
            DixonPrice => {
                let u = x[0] - 1.0;
                out.push(compose(square(1.0, u), Inner { grad: &[(0, 1.0)], hess: &[] }));
                for i in 1..n {
                    let u = 2.0 * x[i] * x[i] - x[i - 1];
                    out.push(compose(
                        square((i + 1) as f64, u),
                        Inner {
                            grad: &[(i - 1, -1.0), (i, 4.0 * x[i])],
                            hess: &[(i, i, 4.0)],
                        },
                    ));
                }
            }
            Edensch => {
                constant = 16.0;
                for i in 0..last {
                    let a = x[i] - 2.0;
                    out.push(compose(fourth(a), Inner { grad: &[(i, 1.0)], hess: &[] }));
                    let r = x[i + 1] * a;
                    out.push(compose(
                        square(1.0, r),
                        Inner {
                            grad: &[(i, x[i + 1]), (i + 1, a)],
                            hess: &[(i, i + 1, 1.0)],
                        },
                    ));
                    let b = x[i + 1] + 1.0;
                    out.push(compose(square(1.0, b), Inner { grad: &[(i + 1, 1.0)], hess: &[] }));
                }
            }
            Eg2 => {
                for i in 0..last {
                    let u = x[0] + x[i] * x[i] - 1.0;
                    let outer = (u.sin(), u.cos(), -u.sin());
                    if i == 0 {
                        out.push(compose(outer, Inner { grad: &[(0, 1.0 + 2.0 * x[0])], hess: &[(0, 0, 2.0)] }));
                    } else {
                        out.push(compose(
                            outer,
                            Inner {
                                grad: &[(0, 1.0), (i, 2.0 * x[i])],
                                hess: &[(i, i, 2.0)],
                            },
                        ));
                    }
                }
                let u = x[last] * x[last];
                out.push(compose(
                    (0.5 * u.sin(), 0.5 * u.cos(), -0.5 * u.sin()),
                    Inner { grad: &[(last, 2.0 * x[last])], hess: &[(last, last, 2.0)] },
                ));
            }
            Fletchcr => {
                for i in 0..last {
                    let u = x[i + 1] - x[i] + 1.0 - x[i] * x[i];
                    out.push(compose(
                        square(100.0, u),
                        Inner {
                            grad: &[(i, -1.0 - 2.0 * x[i]), (i + 1, 1.0)],
                            hess: &[(i, i, -2.0)],
                        },
                    ));
                }
            }
            Raydan1 => {
                for i in 0..n {
                    let c = (i + 1) as f64 / 10.0;
                    let e = x[i].exp();
                    out.push(compose((c * (e - x[i]), c * (e - 1.0), c * e), Inner { grad: &[(i, 1.0)], hess: &[] }));
                }
            }
            Rosenbrock => {
                for k in 0..n / 2 {
                    let (i, j) = (2 * k, 2 * k + 1);
                    let u = x[j] - x[i] * x[i];
                    out.push(compose(
                        square(100.0, u),
                        Inner {
                            grad: &[(i, -2.0 * x[i]), (j, 1.0)],
                            hess: &[(i, i, -2.0)],
                        },
                    ));
                    let v = 1.0 - x[i];
                    out.push(compose(square(1.0, v), Inner { grad: &[(i, -1.0)], hess: &[] }));
                }
            }
            Sinquad => {
                let u = x[0] - 1.0;
                out.push(compose(fourth(u), Inner { grad: &[(0, 1.0)], hess: &[] }));
                for i in 1..last {
                    let d = x[i] - x[last];
                    let (s, c) = d.sin_cos();
                    let u = s - x[0] * x[0] + x[i] * x[i];
                    out.push(compose(
                        square(1.0, u),
                        Inner {
                            grad: &[(0, -2.0 * x[0]), (i, c + 2.0 * x[i]), (last, -c)],
                            hess: &[(0, 0, -2.0), (i, i, 2.0 - s), (i, last, s), (last, last, -s)],
                        },
                    ));
                }
                let u = x[last] * x[last] - x[0] * x[0];
                out.push(compose(
                    square(1.0, u),
                    Inner {
                        grad: &[(0, -2.0 * x[0]), (last, 2.0 * x[last])],
                        hess: &[(0, 0, -2.0), (last, last, 2.0)],
                    },
                ));
            }
            Tointgss => {
                let w0 = 10.0 / (n as f64 + 2.0);
                for i in 0..n - 2 {
                    out.push(tointgss_element(w0, i, x[i], x[i + 1], x[i + 2]));
                }
            }
            Trid => {
                for i in 0..n {
                    let u = x[i] - 1.0;
                    out.push(compose(square(1.0, u), Inner { grad: &[(i, 1.0)], hess: &[] }));
                    if i > 0 {
                        out.push(Element {
                            value: -x[i] * x[i - 1],
                            grad: vec![(i, -x[i - 1]), (i - 1, -x[i])],
                            hess: vec![(i - 1, i, -1.0)],
                        });
                    }
                }
            }
            DoubleWell => {
                for i in 0..n {
                    let t = x[i];
                    out.push(compose(
                        (t.powi(4) - t * t, 4.0 * t.powi(3) - 2.0 * t, 12.0 * t * t - 2.0),
                        Inner { grad: &[(i, 1.0)], hess: &[] },
                    ));
                }
            }
        }
        (constant, out)
    }
}

/// `w(c)·T(a, b, c)` with `w = w₀ + c²` and `T = 2 − exp(−(a − b)² / (0.1 + c²))`.
fn tointgss_element(w0: f64, i: usize, a: f64, b: f64, c: f64) -> Element {
    let d = a - b;
    let p = 0.1 + c * c;
    let r = d * d / p;
    let e = (-r).exp();
    let t = 2.0 - e;
    let w = w0 + c * c;
    // Gradient and Hessian of r over (a, b, c).
    let dr = [2.0 * d / p, -2.0 * d / p, -2.0 * c * d * d / (p * p)];
    let rac = -4.0 * c * d / (p * p);
    let rcc = -2.0 * d * d / (p * p) + 8.0 * c * c * d * d / (p * p * p);
    let hr = [[2.0 / p, -2.0 / p, rac], [-2.0 / p, 2.0 / p, -rac], [rac, -rac, rcc]];
    let dt: [f64; 3] = std::array::from_fn(|k| e * dr[k]);
    let dw = [0.0, 0.0, 2.0 * c];
    let idx = [i, i + 1, i + 2];
    let mut hess = Vec::with_capacity(6);
    for j in 0..3 {
        for k in j..3 {
            let htjk = e * (hr[j][k] - dr[j] * dr[k]);
            let mut h = w * htjk + dw[j] * dt[k] + dt[j] * dw[k];
            if j == 2 && k == 2 {
                h += 2.0 * t;
            }
            hess.push((idx[j], idx[k], h));
        }
    }
    Element {
        value: w * t,
        grad: (0..3).map(|k| (idx[k], w * dt[k] + t * dw[k])).collect(),
        hess,
    }
}

impl Objective for BenchmarkObjective {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (constant, elems) = self.elements(x);
        constant + elems.iter().map(|e| e.value).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (constant, elems) = self.elements(x);
        let mut g = vec![0.0; self.n];
        let mut f = constant;
        for e in &elems {
            f += e.value;
            for &(i, gi) in &e.grad {
                g[i] += gi;
            }
        }
        (f, g)
    }

    fn hess_action(&self, x: &[f64], v: &DenseMatrix) -> DenseMatrix {
        let (_, elems) = self.elements(x);
        let mut out = DenseMatrix::zeros(self.n, v.cols());
        for c in 0..v.cols() {
            let vc = v.col(c).to_vec();
            let oc = out.col_mut(c);
            for e in &elems {
                for &(i, j, h) in &e.hess {
                    oc[i] += h * vc[j];
                    if i != j {
                        oc[j] += h * vc[i];
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{check_gradient, check_hess_action};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rosenbrock_minimizer() {
        let f = benchmark_oracle(BenchmarkFunction::Rosenbrock, 6).unwrap();
        let (v, g) = f.value_and_gradient(&[1.0; 6]);
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&t| t == 0.0));
        let f2 = benchmark_oracle(BenchmarkFunction::Rosenbrock, 2).unwrap();
        assert!((f2.value(&[-1.2, 1.0]) - 24.2).abs() < 1e-12);
    }

    #[test]
    fn trid_closed_form_minimum() {
        for n in [2, 5, 10] {
            let f = benchmark_oracle(BenchmarkFunction::Trid, n).unwrap();
            let x: Vec<f64> = (1..=n).map(|i| (i * (n + 1 - i)) as f64).collect();
            let fmin = BenchmarkFunction::Trid.known_minimum(n).unwrap();
            assert!((f.value(&x) - fmin).abs() < 1e-9 * fmin.abs());
            assert!(f.gradient(&x).iter().all(|g| g.abs() < 1e-9));
        }
    }

    #[test]
    fn arwhead_minimum() {
        let f = benchmark_oracle(BenchmarkFunction::Arwhead, 4).unwrap();
        assert_eq!(f.value(&[1.0, 1.0, 1.0, 0.0]), 0.0);
    }

    #[test]
    fn double_well_minimum() {
        let f = benchmark_oracle(BenchmarkFunction::DoubleWell, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.value(&[r]) + 0.25).abs() < 1e-15);
        assert!(f.gradient(&[r])[0].abs() < 1e-15);
    }

    #[test]
    fn dimension_constraints() {
        assert!(matches!(
            benchmark_oracle(BenchmarkFunction::Rosenbrock, 3),
            Err(ProblemError::BadDimension { .. })
        ));
        assert!(benchmark_oracle(BenchmarkFunction::Bdqrtic, 4).is_err());
        assert!(benchmark_oracle(BenchmarkFunction::Raydan1, 1).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for f in BenchmarkFunction::ALL {
            assert_eq!(f.name().parse::<BenchmarkFunction>().unwrap(), f);
        }
        assert_eq!("x4-x2".parse::<BenchmarkFunction>().unwrap(), BenchmarkFunction::DoubleWell);
        assert!(matches!("nope".parse::<BenchmarkFunction>(), Err(ProblemError::UnknownFunction(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for f in BenchmarkFunction::ALL {
            for n in [f.min_dim().max(6), 11] {
                if !f.accepts_dim(n) {
                    continue;
                }
                let obj = benchmark_oracle(f, n).unwrap();
                for _ in 0..3 {
                    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let ge = check_gradient(&obj, &x, 1e-6).unwrap();
                    let he = check_hess_action(&obj, &x, &v, 1e-6).unwrap();
                    assert!(ge <= 1e-5, "{f} n={n} gradient error {ge:e}");
                    assert!(he <= 1e-4, "{f} n={n} Hessian error {he:e}");
                }
            }
        }
    }
}
