//! Numerical tolerances shared across modules.
//!
//! The acceptance suite pins its thresholds against these defaults, so they
//! live in one place.

/// Tolerance record for the closed-form distribution routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative step tolerance for the Halley iteration in the Lambert W solvers.
    pub lambert_rel_tol: f64,
    /// Iteration cap for the Lambert W solvers.
    pub lambert_max_iter: usize,
    /// Distance from the branch point `-1/e` below which the square-root series is used.
    pub lambert_branch_switch: f64,
    /// Relative slack allowed when `y` falls just below `y_min`.
    pub ymin_slack: f64,
    /// Absolute bisection tolerance for quantiles.
    pub quantile_abs_tol: f64,
    /// Standard deviations above the mean for the initial quantile bracket.
    pub quantile_bracket_sigmas: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        lambert_rel_tol: 1e-14,
        lambert_max_iter: 50,
        lambert_branch_switch: 1e-6,
        ymin_slack: 1e-12,
        quantile_abs_tol: 1e-9,
        quantile_bracket_sigmas: 20.0,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
