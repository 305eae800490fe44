//! Numerical tolerances shared by the library and its tests.

/// Exact complex-amplitude algebra (normalization, unitarity).
pub const ALGEBRAIC: f64 = 1e-12;

/// Probability sums and closed-form identities.
pub const PROBABILITY_SUM: f64 = 1e-9;

/// Default bisection tolerance for threshold solvers.
pub const SOLVER: f64 = 1e-6;

/// Resolution of the bracket scan that precedes bisection.
pub const BRACKET_SCAN_STEP: f64 = 1e-3;

/// Default false-positive rate behind the Hoeffding check tolerance.
pub const CHECK_EPSILON: f64 = 1e-6;

/// Width, in standard deviations, of the Monte Carlo agreement bands.
pub const MONTE_CARLO_SIGMAS: f64 = 5.0;
