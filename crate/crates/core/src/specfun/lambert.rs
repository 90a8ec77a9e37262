//! Real branches of the Lambert W function.
//!
//! `W0` is the principal branch (`w >= -1`) on `[-1/e, inf)`, `W-1` the lower
//! branch (`w <= -1`) on `[-1/e, 0)`. Both are refined by Halley iteration on
//! `w e^w = z`; within `lambert_branch_switch` of `-1/e` the square-root series
//! in `p = sqrt(2(ez + 1))` is used instead.

use crate::config::Tolerances;
use crate::error::{domain, Error, Result};
use std::f64::consts::E;

use super::log1pmx;

// 1/e split into a double and its rounding residual.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

// Coefficients of W = -1 + p - p^2/3 + ... around the branch point.
const BRANCH_SERIES: [f64; 9] = [
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680_863.0 / 43_545_600.0,
    -1963.0 / 204_120.0,
    226_287_557.0 / 37_623_398_400.0,
];

/// Selects one of the two real branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Principal branch `W0`, values in `[-1, 0)` for negative arguments.
    Principal,
    /// Lower branch `W-1`, values in `(-inf, -1]`.
    Lower,
}

/// A Lambert W value together with `1 + w`, which is accurate even when `w`
/// is close to `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WNearBranch {
    pub w: f64,
    pub one_plus_w: f64,
}

/// `1 + W` from the branch-point series; `p` carries the branch sign.
fn branch_series_offset(p: f64) -> f64 {
    BRANCH_SERIES.iter().rev().fold(0.0, |acc, &c| (acc + c) * p)
}

/// Distance `z + 1/e`, computed with the split constant.
fn branch_distance(z: f64) -> f64 {
    (z + INV_E_HI) + INV_E_LO
}

fn halley_w(z: f64, start: f64, tol: &Tolerances) -> Result<f64> {
    let ln_abs_z = z.abs().ln();
    let mut w = start;
    for _ in 0..tol.lambert_max_iter {
        // t = (w e^w - z) e^{-w}, written to avoid overflow for large |w|.
        let t = w - z.signum() * (ln_abs_z - w).exp();
        let wp1 = w + 1.0;
        let step = t / (wp1 - (w + 2.0) * t / (2.0 * wp1));
        if !step.is_finite() {
            return Err(Error::Convergence(format!("Halley step not finite at z = {z}")));
        }
        w -= step;
        if step.abs() <= tol.lambert_rel_tol * w.abs() {
            return Ok(w);
        }
    }
    Err(Error::Convergence(format!(
        "Lambert W did not converge for z = {z} within {} iterations",
        tol.lambert_max_iter
    )))
}

fn tolerances_with(rel_tol: f64) -> Tolerances {
    Tolerances {
        lambert_rel_tol: rel_tol.max(f64::EPSILON),
        ..Tolerances::DEFAULT
    }
}

/// Principal branch `W0(z)` for `z >= -1/e`.
///
/// `tol` is the relative step tolerance of the Halley iteration and also the
/// slack accepted below the branch point.
pub fn lambert_w0(z: f64, tol: f64) -> Result<f64> {
    if z.is_nan() {
        return domain("W0 of NaN");
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let cfg = tolerances_with(tol);
    let q = branch_distance(z);
    if q < 0.0 {
        if q >= -tol {
            return Ok(-1.0);
        }
        return domain(format!("W0 undefined for z = {z} < -1/e"));
    }
    if q <= cfg.lambert_branch_switch {
        let p = (2.0 * E * q).sqrt();
        return Ok(branch_series_offset(p) - 1.0);
    }
    let start = if z <= -0.25 {
        let p = (2.0 * E * q).sqrt();
        p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0)) - 1.0
    } else if z < E {
        let l = z.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    halley_w(z, start, &cfg)
}

/// Lower branch `W-1(z)` for `-1/e <= z < 0`.
pub fn lambert_wm1(z: f64, tol: f64) -> Result<f64> {
    if z.is_nan() || z >= 0.0 {
        return domain(format!("W-1 undefined for z = {z} >= 0"));
    }
    let cfg = tolerances_with(tol);
    let q = branch_distance(z);
    if q < 0.0 {
        if q >= -tol {
            return Ok(-1.0);
        }
        return domain(format!("W-1 undefined for z = {z} < -1/e"));
    }
    if q <= cfg.lambert_branch_switch {
        let p = (2.0 * E * q).sqrt();
        return Ok(branch_series_offset(-p) - 1.0);
    }
    let start = if z <= -0.25 {
        let p = -(2.0 * E * q).sqrt();
        p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0))) - 1.0
    } else {
        let l1 = (-z).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    halley_w(z, start, &cfg)
}

/// `W(-exp(-1 - s))` on the requested branch, for `s >= 0`.
///
/// Parametrizing the argument by its distance `s` from the branch point keeps
/// full relative accuracy in `1 + w` as `s -> 0`, where evaluating `z + 1/e`
/// directly would cancel. With `u = -w` this solves `u - 1 - ln u = s`.
pub fn lambert_w_neg_exp(s: f64, branch: Branch) -> Result<WNearBranch> {
    if s.is_nan() || s < 0.0 {
        return domain(format!("branch distance must be nonnegative, got {s}"));
    }
    if s == 0.0 {
        return Ok(WNearBranch { w: -1.0, one_plus_w: 0.0 });
    }
    if s.is_infinite() {
        return Ok(match branch {
            Branch::Principal => WNearBranch { w: 0.0, one_plus_w: 1.0 },
            Branch::Lower => WNearBranch { w: f64::NEG_INFINITY, one_plus_w: f64::NEG_INFINITY },
        });
    }
    let cfg = Tolerances::DEFAULT;
    let p = (-2.0 * (-s).exp_m1()).sqrt();
    let sign = match branch {
        Branch::Principal => 1.0,
        Branch::Lower => -1.0,
    };
    if s <= cfg.lambert_branch_switch {
        let opw = branch_series_offset(sign * p);
        return Ok(WNearBranch { w: opw - 1.0, one_plus_w: opw });
    }

    // h(d) = d - ln(1 + d) - s with d = u - 1 = -(1 + w).
    let h = |d: f64| {
        let opd = 1.0 + d;
        (-log1pmx(d) - s, d / opd, 1.0 / (opd * opd))
    };

    match branch {
        Branch::Lower => {
            let start = p * (1.0 + p * (1.0 / 3.0 + p * (11.0 / 72.0 + p * 43.0 / 540.0)));
            let d = safeguarded_halley(h, start, 0.0, 2.0 * s + 2.0, true, &cfg)?;
            Ok(WNearBranch { w: -(1.0 + d), one_plus_w: -d })
        }
        Branch::Principal if s <= 1.0 => {
            let start = -p * (1.0 - p * (1.0 / 3.0 - p * (11.0 / 72.0 - p * 43.0 / 540.0)));
            let d = safeguarded_halley(h, start.max(-0.999), -1.0, 0.0, false, &cfg)?;
            Ok(WNearBranch { w: -(1.0 + d), one_plus_w: -d })
        }
        Branch::Principal => {
            // u is small here; Newton on e^L - L - 1 - s for L = ln u.
            let target = 1.0 + s;
            let mut l = -target + (-target).exp();
            for _ in 0..cfg.lambert_max_iter {
                let eu = l.exp();
                let step = (eu - l - target) / (eu - 1.0);
                l -= step;
                if step.abs() <= cfg.lambert_rel_tol * l.abs() {
                    let u = l.exp();
                    return Ok(WNearBranch { w: -u, one_plus_w: -l.exp_m1() });
                }
            }
            Err(Error::Convergence(format!("W0(-exp(-1-s)) did not converge for s = {s}")))
        }
    }
}

/// Halley iteration kept inside `[lo, hi]`, falling back to bisection when a
/// step leaves the bracket. `f` returns value, first and second derivative.
fn safeguarded_halley<F>(
    f: F,
    start: f64,
    mut lo: f64,
    mut hi: f64,
    increasing: bool,
    cfg: &Tolerances,
) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let mut x = start.clamp(lo, hi);
    for _ in 0..4 * cfg.lambert_max_iter {
        let (v, d1, d2) = f(x);
        if v == 0.0 {
            return Ok(x);
        }
        if (v < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let newton = v / d1;
        let step = newton / (1.0 - 0.5 * newton * d2 / d1);
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= cfg.lambert_rel_tol * x.abs() || moved == 0.0 {
            // one polishing Newton step
            let (v, d1, _) = f(x);
            let polished = x - v / d1;
            let better = polished.is_finite() && f(polished).0.abs() < v.abs();
            return Ok(if better { polished } else { x });
        }
    }
    Err(Error::Convergence("safeguarded Halley iteration exhausted".into()))
}
