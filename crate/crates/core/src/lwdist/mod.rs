//! The log-Lambert W x F family.
//!
//! `Y = g(X) = theta1 - theta2 ln X + theta3 X` for `X ~ F` on `[0, inf)`.
//! `g` is strictly convex with minimum `y_min` at `x = theta2 / theta3`, so
//! every `y > y_min` has two preimages, one on each side of the minimum,
//! given by the two real branches of Lambert W.
//!
//! Writing `x = (theta2 / theta3) u` and `s = (y - y_min) / theta2`, the
//! equation `g(x) = y` becomes `u - 1 - ln u = s`, i.e. `u = -W(-e^{-1-s})`.
//! The roots are computed in that form, which stays accurate near the
//! minimum where the argument of W approaches the branch point.

mod base;
mod chi2;

pub use base::{chi2_base, BaseDistribution, ChiSquared, GammaDist};
pub use chi2::{
    lw_chi2_cf, lw_chi2_cumulants, lw_chi2_mgf, standard_lw_chi2, CumulantSet, LWChiSquared,
    MAX_CUMULANT_ORDER,
};

use crate::config::Tolerances;
use crate::error::{domain, Result};
use crate::specfun::{lambert_w_neg_exp, log1pmx, Branch};

/// Parameters of the transform `g(x) = theta1 - theta2 ln x + theta3 x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    theta1: f64,
    theta2: f64,
    theta3: f64,
    y_min: f64,
}

impl Theta {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        Self::validate(theta1, theta2, theta3)?;
        let y_min = theta1 + theta2 - theta2 * (theta2 / theta3).ln();
        Ok(Self { theta1, theta2, theta3, y_min })
    }

    fn validate(theta1: f64, theta2: f64, theta3: f64) -> Result<()> {
        if !theta1.is_finite() {
            return domain(format!("theta1 must be finite, got {theta1}"));
        }
        if !(theta2 > 0.0) || !theta2.is_finite() || !(theta3 > 0.0) || !theta3.is_finite() {
            return domain(format!("theta2 and theta3 must be positive, got ({theta2}, {theta3})"));
        }
        if !(theta2 / theta3).is_finite() || theta2 / theta3 == 0.0 {
            return domain("theta2 / theta3 must be finite and positive");
        }
        Ok(())
    }

    /// `(nu (ln nu - 1), nu, 1)`, for which `y_min = 0`.
    pub fn standard(nu: f64) -> Result<Self> {
        Self::standard_scaled(nu, 1.0)
    }

    /// `(nu (ln(nu / lambda) - 1), nu, lambda)`: the law of the standard
    /// statistic when the true scale is `lambda` times the null one.
    /// `y_min = 0` for every `lambda`.
    pub fn standard_scaled(nu: f64, lambda: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("nu must be positive, got {nu}"));
        }
        let theta1 = nu * ((nu / lambda).ln() - 1.0);
        Self::validate(theta1, nu, lambda)?;
        Ok(Self { theta1, theta2: nu, theta3: lambda, y_min: 0.0 })
    }

    /// `((nu + 2) ln nu - nu, nu + 2, 1)`, the statistic behind the
    /// minimum-length variance interval.
    pub fn min_length(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("nu must be positive, got {nu}"));
        }
        let theta1 = (nu + 2.0) * nu.ln() - nu;
        Self::validate(theta1, nu + 2.0, 1.0)?;
        let y_min = 2.0 - (nu + 2.0) * (2.0 / nu).ln_1p();
        Ok(Self { theta1, theta2: nu + 2.0, theta3: 1.0, y_min })
    }

    /// Maps the `(a, b, c)` parametrization onto `theta = (c ln b - a, c, 1)`.
    pub fn from_abc(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(b > 0.0) {
            return domain(format!("b must be positive, got {b}"));
        }
        Self::new(c * b.ln() - a, c, 1.0)
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn theta3(&self) -> f64 {
        self.theta3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    /// Location of the minimum, `theta2 / theta3`.
    pub fn x_at_min(&self) -> f64 {
        self.theta2 / self.theta3
    }

    /// `theta1 + theta2 - theta2 ln(theta2 / theta3)`.
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
}

/// `g(x) = theta1 - theta2 ln x + theta3 x`.
///
/// Evaluated as `y_min + theta2 (r - 1 - ln r)` with `r = x / x_at_min`,
/// which is exact algebra and never falls below `y_min`.
pub fn transform(theta: &Theta, x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("transform requires x > 0, got {x}"));
    }
    let r = x / theta.x_at_min();
    if r.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(theta.y_min + theta.theta2 * excess_over_min(r))
}

/// `r - 1 - ln r >= 0`, accurate near `r = 1`.
pub(crate) fn excess_over_min(r: f64) -> f64 {
    let v = if (0.5..=1.5).contains(&r) { -log1pmx(r - 1.0) } else { r - 1.0 - r.ln() };
    // also maps -0.0 to 0.0
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// The two preimages of `y`, with the scaled offsets from the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Roots {
    pub x_lower: f64,
    pub x_upper: f64,
    /// `x_lower / x_at_min - 1`, in `[-1, 0]`.
    pub d_lower: f64,
    /// `x_upper / x_at_min - 1`, in `[0, inf]`.
    pub d_upper: f64,
}

/// Scaled distance `(y - y_min) / theta2`, or `None` below the support.
fn branch_distance(theta: &Theta, y: f64) -> Result<Option<f64>> {
    if y.is_nan() {
        return domain("y is NaN");
    }
    let s = (y - theta.y_min) / theta.theta2;
    if s >= 0.0 {
        return Ok(Some(s));
    }
    let slack = Tolerances::DEFAULT.ymin_slack * (1.0 + theta.y_min.abs());
    if y >= theta.y_min - slack {
        Ok(Some(0.0))
    } else {
        Ok(None)
    }
}

pub(crate) fn roots_at_distance(theta: &Theta, s: f64) -> Result<Roots> {
    let rho = theta.x_at_min();
    let lo = lambert_w_neg_exp(s, Branch::Principal)?;
    let up = lambert_w_neg_exp(s, Branch::Lower)?;
    Ok(Roots {
        x_lower: -rho * lo.w,
        x_upper: -rho * up.w,
        d_lower: -lo.one_plus_w,
        d_upper: -up.one_plus_w,
    })
}

/// Both solutions of `g(x) = y`: `x_lower <= theta2 / theta3 <= x_upper`.
pub fn branch_solutions(theta: &Theta, y: f64) -> Result<(f64, f64)> {
    match branch_distance(theta, y)? {
        Some(s) => {
            let r = roots_at_distance(theta, s)?;
            Ok((r.x_lower, r.x_upper))
        }
        None => domain(format!("y = {y} lies below y_min = {}", theta.y_min)),
    }
}

/// `cdf(y) = F(x_upper) - F(x_lower)`, zero at and below `y_min`.
pub fn lw_cdf<B: BaseDistribution + ?Sized>(base: &B, theta: &Theta, y: f64) -> Result<f64> {
    let s = match branch_distance(theta, y)? {
        Some(s) if s > 0.0 => s,
        _ => return Ok(0.0),
    };
    let r = roots_at_distance(theta, s)?;
    Ok(base.cdf_interval(r.x_lower, r.x_upper)?.clamp(0.0, 1.0))
}

/// `1 - cdf(y) = F(x_lower) + (1 - F(x_upper))`, accurate in the upper tail.
pub fn lw_sf<B: BaseDistribution + ?Sized>(base: &B, theta: &Theta, y: f64) -> Result<f64> {
    let s = match branch_distance(theta, y)? {
        Some(s) if s > 0.0 => s,
        _ => return Ok(1.0),
    };
    let r = roots_at_distance(theta, s)?;
    Ok((base.cdf(r.x_lower)? + base.sf(r.x_upper)?).clamp(0.0, 1.0))
}

/// Density of `Y`; `+inf` at `y_min`, where it has an integrable
/// inverse-square-root singularity.
pub fn lw_pdf<B: BaseDistribution + ?Sized>(base: &B, theta: &Theta, y: f64) -> Result<f64> {
    let s = match branch_distance(theta, y)? {
        Some(s) => s,
        None => return Ok(0.0),
    };
    if s == 0.0 {
        return Ok(f64::INFINITY);
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    let r = roots_at_distance(theta, s)?;
    // |dx/dy| = x / |theta3 x - theta2| = u / (theta3 |u - 1|)
    // u taken from x rather than 1 + d, which cancels when u is tiny
    let t3 = theta.theta3;
    let rho = theta.x_at_min();
    let upper = if r.x_upper.is_finite() {
        base.pdf(r.x_upper)? * (r.x_upper / rho) / (t3 * r.d_upper)
    } else {
        0.0
    };
    let lower = if r.x_lower > 0.0 {
        base.pdf(r.x_lower)? * (r.x_lower / rho) / (t3 * -r.d_lower)
    } else {
        0.0
    };
    Ok(upper + lower)
}

/// Smallest `y` with `cdf(y) >= p`, by bisection to `1e-9` absolute
/// (relative to `y - y_min` when that is below one).
pub fn lw_quantile<B: BaseDistribution + ?Sized>(base: &B, theta: &Theta, p: f64) -> Result<f64> {
    quantile_from(base, theta, p, None)
}

pub(crate) fn quantile_from<B: BaseDistribution + ?Sized>(
    base: &B,
    theta: &Theta,
    p: f64,
    upper_guess: Option<f64>,
) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return domain(format!("probability must lie in [0, 1), got {p}"));
    }
    let y_min = theta.y_min;
    if p == 0.0 {
        return Ok(y_min);
    }
    let tol = Tolerances::DEFAULT.quantile_abs_tol;
    let mut width = match upper_guess {
        Some(h) if h > y_min => h - y_min,
        _ => theta.theta2.max(1.0),
    };
    let mut lo = y_min;
    let mut hi = y_min + width;
    while lw_cdf(base, theta, hi)? < p {
        lo = hi;
        width *= 2.0;
        hi = y_min + width;
        if !hi.is_finite() {
            return Err(crate::error::Error::Convergence(format!(
                "quantile bracket for p = {p} diverged"
            )));
        }
    }
    // absolute tolerance, tightened near y_min where the CDF is steep
    while hi - lo > tol * (hi - y_min).min(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lw_cdf(base, theta, mid)? >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
