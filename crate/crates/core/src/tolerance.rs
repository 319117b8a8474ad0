//! Numerical tolerances shared by the library and its tests.
//!
//! Keeping them in one place means a test asserting "Hermitian to 1e-10" and
//! the library gate that rejects non-Hermitian input cannot drift apart.

/// Max-abs entry deviation `|h - h†|` accepted for a Hermitian input.
pub const HERM_TOL: f64 = 1e-10;

/// Spectral-norm deviation `‖U†U - I‖` expected from eigen-based exponentials.
pub const UNITARY_TOL: f64 = 1e-12;

/// Cyclic Jacobi stops once the off-diagonal Frobenius mass falls below this
/// fraction of the total Frobenius norm.
pub const JACOBI_OFF_TOL: f64 = 1e-13;

/// Residual norm below which two operators are taken to commute or anticommute.
pub const ORTHO_TOL: f64 = 1e-10;

/// Rank tolerance for Gram–Schmidt in the Lie-closure builder.
pub const RANK_TOL: f64 = 1e-9;

/// Absolute tolerance for pulse-shape integrals.
pub const QUAD_TOL: f64 = 1e-12;

/// Residual target for the pulse-shape root finder.
pub const DESIGN_TOL: f64 = 1e-10;

/// Maximum step-halving disagreement tolerated by the pulse integrator.
pub const STEP_HALVING_TOL: f64 = 1e-11;

/// Default lower filter for errors entering a log-log fit.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Default upper filter for errors entering a log-log fit.
pub const ERROR_CEILING: f64 = 1e-2;

/// RMS log-space residual above which a fitted slope is not reported.
pub const FIT_RMS_MAX: f64 = 0.1;

/// Minimum number of surviving points for a reported slope.
pub const FIT_MIN_POINTS: usize = 4;
