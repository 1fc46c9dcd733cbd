use serde::{Deserialize, Serialize};

use crate::linesearch::LineSearchParams;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BlockBfgs,
    RollingBlockBfgs,
    Bfgs,
    DampedBfgs,
    CautiousBfgs,
    ModifiedBfgs,
    GradientDescent,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BlockBfgs => "block_bfgs",
            Method::RollingBlockBfgs => "rolling_block_bfgs",
            Method::Bfgs => "bfgs",
            Method::DampedBfgs => "damped_bfgs",
            Method::CautiousBfgs => "cautious_bfgs",
            Method::ModifiedBfgs => "modified_bfgs",
            Method::GradientDescent => "gradient_descent",
        }
    }
}

/// Largest integer `r` with `r³ ≤ n`.
pub fn cube_root_floor(n: usize) -> usize {
    let mut r = (n as f64).cbrt().round() as usize;
    while r > 0 && r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    /// Steps per block. `None` picks `⌊n^{1/3}⌋` for Block BFGS and
    /// `min(3, ⌊n^{1/3}⌋)` for the rolling variant.
    pub q: Option<usize>,
    /// Filter threshold on `σᵢ² ≥ τ‖sᵢ‖²`.
    pub tau: f64,
    /// Run the step filter before each block update. When off, all steps are
    /// used and a block whose `DᵀGD` is not positive definite is skipped.
    pub filter: bool,
    pub always_keep_first: bool,
    pub ls: LineSearchParams,
    pub grad_tol: f64,
    pub f_stop: Option<f64>,
    pub max_steps: usize,
    pub h0_scale: f64,
    pub cautious_eps: f64,
    pub cautious_exponent: f64,
    pub modified_eps: f64,
    pub damping_phi: f64,
    /// Keep every iterate in the trace.
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::BlockBfgs,
            q: None,
            tau: 1e-3,
            filter: true,
            always_keep_first: false,
            ls: LineSearchParams::default(),
            grad_tol: 1e-6,
            f_stop: None,
            max_steps: 5000,
            h0_scale: 1.0,
            cautious_eps: 1e-6,
            cautious_exponent: 1.0,
            modified_eps: 1e-6,
            damping_phi: 0.2,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    /// Defaults for a method. The rolling variant runs without filtering.
    pub fn new(method: Method) -> Self {
        Self {
            method,
            filter: method != Method::RollingBlockBfgs,
            ..Self::default()
        }
    }

    pub fn with_iterates(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn with_q(mut self, q: usize) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_filter(mut self, filter: bool) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_f_stop(mut self, f_stop: Option<f64>) -> Self {
        self.f_stop = f_stop;
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn block_size(&self, n: usize) -> usize {
        self.q.unwrap_or_else(|| match self.method {
            Method::RollingBlockBfgs => cube_root_floor(n).clamp(1, 3),
            _ => cube_root_floor(n).max(1),
        })
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidConfig(msg.to_string()));
        if self.q == Some(0) {
            return bad("q must be at least 1");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if !(self.h0_scale > 0.0 && self.h0_scale.is_finite()) {
            return bad("h0_scale must be positive and finite");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be non-negative");
        }
        if !(self.damping_phi > 0.0 && self.damping_phi < 1.0) {
            return bad("damping_phi must lie in (0, 1)");
        }
        if !(self.modified_eps > 0.0) {
            return bad("modified_eps must be positive");
        }
        self.ls
            .validate()
            .map_err(|e| SolverError::InvalidConfig(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_is_exact_on_cubes() {
        assert_eq!(cube_root_floor(1), 1);
        assert_eq!(cube_root_floor(7), 1);
        assert_eq!(cube_root_floor(8), 2);
        assert_eq!(cube_root_floor(26), 2);
        assert_eq!(cube_root_floor(27), 3);
        assert_eq!(cube_root_floor(64), 4);
        assert_eq!(cube_root_floor(999), 9);
        assert_eq!(cube_root_floor(1000), 10);
    }

    #[test]
    fn default_block_sizes() {
        assert_eq!(SolverConfig::new(Method::BlockBfgs).block_size(100), 4);
        assert_eq!(SolverConfig::new(Method::RollingBlockBfgs).block_size(100), 3);
        assert_eq!(SolverConfig::new(Method::RollingBlockBfgs).block_size(5), 1);
        assert_eq!(SolverConfig::new(Method::BlockBfgs).with_q(2).block_size(100), 2);
        assert!(!SolverConfig::new(Method::RollingBlockBfgs).filter);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(SolverConfig::default().with_q(0).validate().is_err());
        assert!(SolverConfig::default().with_tau(0.0).validate().is_err());
        assert!(SolverConfig::default().with_max_steps(0).validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
