use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Costs `t[p][s]` of solver `s` on problem `p`; `+∞` marks unsolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    pub t: Vec<Vec<f64>>,
}

impl CostMatrix {
    pub fn new(solvers: Vec<String>, problems: Vec<String>, t: Vec<Vec<f64>>) -> Result<Self, BenchError> {
        if t.len() != problems.len() {
            return Err(BenchError::MalformedCosts(format!(
                "{} rows for {} problems",
                t.len(),
                problems.len()
            )));
        }
        if let Some(row) = t.iter().find(|r| r.len() != solvers.len()) {
            return Err(BenchError::MalformedCosts(format!(
                "row of length {} for {} solvers",
                row.len(),
                solvers.len()
            )));
        }
        if t.iter().flatten().any(|c| c.is_nan() || *c < 0.0) {
            return Err(BenchError::MalformedCosts("costs must be non-negative or inf".into()));
        }
        Ok(Self { solvers, problems, t })
    }

    /// Smallest cost per problem; `+∞` when no solver succeeded.
    pub fn best(&self) -> Vec<f64> {
        self.t.iter().map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min)).collect()
    }

    /// Removes problems no solver solved and returns their names.
    pub fn drop_unsolved(self) -> (CostMatrix, Vec<String>) {
        let best = self.best();
        let mut kept = CostMatrix {
            solvers: self.solvers,
            problems: Vec::new(),
            t: Vec::new(),
        };
        let mut dropped = Vec::new();
        for ((name, row), m) in self.problems.into_iter().zip(self.t).zip(best) {
            if m.is_finite() {
                kept.problems.push(name);
                kept.t.push(row);
            } else {
                dropped.push(name);
            }
        }
        (kept, dropped)
    }
}

/// `ρ_s(r)`: fraction of problems solved within a factor `r` of the best solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    /// Sorted distinct finite ratios, all `≥ 1`.
    pub breakpoints: Vec<f64>,
    /// `ρ_s` at each breakpoint.
    pub values: Vec<f64>,
}

impl ProfileCurve {
    pub fn value_at(&self, r: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b <= r) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Limit of `ρ_s(r)` as `r → ∞`.
    pub fn solved_fraction(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn ratio(t: f64, m: f64) -> f64 {
    if t == m {
        1.0
    } else {
        t / m
    }
}

/// Exact performance-profile step functions, one per solver.
///
/// Solvers tied at the best cost get ratio exactly 1.
pub fn performance_profile(costs: &CostMatrix) -> Result<Vec<ProfileCurve>, BenchError> {
    if costs.problems.is_empty() || costs.solvers.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let best = costs.best();
    if let Some(p) = best.iter().position(|m| !m.is_finite()) {
        return Err(BenchError::UnsolvedProblem(costs.problems[p].clone()));
    }
    let n_p = costs.problems.len() as f64;
    let curves = costs
        .solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let mut ratios: Vec<f64> = costs
                .t
                .iter()
                .zip(&best)
                .map(|(row, &m)| ratio(row[s], m))
                .filter(|r| r.is_finite())
                .collect();
            ratios.sort_by(f64::total_cmp);
            let mut breakpoints: Vec<f64> = Vec::new();
            let mut values = Vec::new();
            for (i, &r) in ratios.iter().enumerate() {
                let frac = (i + 1) as f64 / n_p;
                if breakpoints.last() == Some(&r) {
                    *values.last_mut().unwrap() = frac;
                } else {
                    breakpoints.push(r);
                    values.push(frac);
                }
            }
            ProfileCurve {
                solver: name.clone(),
                breakpoints,
                values,
            }
        })
        .collect();
    Ok(curves)
}
