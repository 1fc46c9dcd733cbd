//! Block quasi-Newton optimization.
//!
//! Block BFGS takes several line-search steps with a fixed inverse Hessian
//! approximation, then updates it so that it reproduces the true Hessian's
//! action on those steps (`H⁺·G·D = D`). The Hessian action is obtained from
//! Hessian-vector products, never from the dense Hessian. The crate also
//! carries the classical BFGS baseline, its non-convex variants (damped,
//! cautious, modified), gradient descent, and the objective library used to
//! benchmark them.

pub mod linalg;
pub mod linesearch;
pub mod oracle;
pub mod tol;
pub mod updates;
pub mod solvers;
pub mod problems;
