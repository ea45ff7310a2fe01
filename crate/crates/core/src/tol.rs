//! Shared tolerances and numeric conventions.

/// Residual tolerance for one-dimensional roots.
pub const ABS_TOL: f64 = 1e-10;

/// Seller-mass conservation tolerance.
pub const MASS_TOL: f64 = 1e-12;

/// Cross-submarket payoff equality tolerance.
pub const EQ_TOL: f64 = 1e-8;

/// Lower end of the queue-ratio domain scanned for brackets.
pub const LAMBDA_MIN: f64 = 1e-12;

/// Upper end of the queue-ratio domain scanned for brackets.
pub const LAMBDA_MAX: f64 = 1e6;

/// Bracket expansion never goes beyond these.
pub const LAMBDA_FLOOR: f64 = 1e-250;
pub const LAMBDA_CAP: f64 = 1e15;

/// Log-spaced grid size for the market-clearing / indifference scan.
pub const CURVE_GRID: usize = 2048;

/// Node count for the `λ_B` sweep across the branch band.
pub const BAND_GRID: usize = 1024;

/// Evaluation count for the payoff-asymmetry scan.
pub const G_GRID: usize = 512;

/// Equilibria closer than this in max-norm are the same equilibrium.
pub const DEDUP_TOL: f64 = 1e-6;

/// Relative finite-difference step for `u_G'` checks.
pub fn slope_step(lambda: f64) -> f64 {
    1e-6 * lambda.max(1.0)
}
