//! Named numerical tolerances shared by the library and its tests.

/// Relative Frobenius error allowed when reconstructing a factored matrix.
pub const RECONSTRUCTION: f64 = 1e-10;

/// Default relative tolerance for comparing two computed quantities.
pub const COMPARISON: f64 = 1e-8;

/// Relative residual allowed for the sketching equation after a block update.
pub const SKETCH_RESIDUAL: f64 = 1e-8;

/// Relative tolerance for `B⁺·H⁺ = I` consistency.
pub const INVERSE_CONSISTENCY: f64 = 1e-7;

/// Relative tolerance for the determinant identity of the block update.
pub const DETERMINANT_IDENTITY: f64 = 1e-7;

/// Rank threshold used by the null-space computation.
pub const RANK: f64 = 1e-10;

/// Classical BFGS skips the update when `⟨y,s⟩ ≤ SECANT_SKIP·‖y‖‖s‖`.
pub const SECANT_SKIP: f64 = 1e-12;

/// Slack for the Powell damping guarantee `zᵀs ≥ φ·sᵀBs`.
pub const DAMPING_SLACK: f64 = 1e-12;

/// Relative evaluation-noise floor on objective values. Below it the line
/// search certifies decrease from directional derivatives instead.
pub const F_NOISE: f64 = 1e-12;
