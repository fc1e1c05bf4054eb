//! Numerical thresholds shared across the crate.

/// Symmetry and normal-form checks on curvature matrices.
pub const NORMAL_FORM: f64 = 1e-12;

/// Minimum eigenvalue allowed for B before it is rejected.
pub const PSD_SLACK: f64 = 1e-12;

/// Relative singular-value cutoff for Kalman rank.
pub const RANK: f64 = 1e-10;

/// First scan node for conjugate times.
pub const CONJUGATE_SCAN_START: f64 = 1e-3;

/// Bisection resolution for conjugate times.
pub const CONJUGATE_BISECTION: f64 = 1e-13;

/// Local minima of |det N| below this fraction of the running scale are refined.
pub const TOUCH_GUARD: f64 = 1e-3;

/// Normalized smallest singular value treated as an exact touching root.
pub const TOUCH_ROOT: f64 = 1e-9;

/// Closed-form denominators below this are poles.
pub const POLE: f64 = 1e-12;

/// Allowed imaginary residue in closed forms, relative to the real part.
pub const IMAGINARY_RESIDUE: f64 = 1e-10;

/// Default matrix-exponential propagation steps.
pub const PROPAGATION_STEPS: usize = 2048;

/// Default RK4 step on the Hamiltonian lift.
pub const RK4_STEP: f64 = 1.0 / 4096.0;

/// RK4 step cap relative to the target time, so small `t` keeps relative accuracy.
pub const RK4_RELATIVE_STEP: f64 = 1.0 / 256.0;

/// Default monotonicity tolerance on ratio increments.
pub const MONOTONE: f64 = 1e-7;

/// Relative slack for pointwise curvature hypotheses.
pub const HYPOTHESIS: f64 = 1e-10;

/// Default finite-difference step for the exponential-map Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-4;
