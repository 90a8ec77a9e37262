//! Polygamma functions `psi^(m)(x)` for real `x > 0`.

use crate::error::{domain, Result};

/// Highest supported order.
pub const MAX_POLYGAMMA_ORDER: u32 = 12;

// Asymptotic expansion is used once the argument has been shifted past this.
const SHIFT_TO: f64 = 20.0;

// Bernoulli numbers B_2, B_4, ..., B_30.
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
    854_513.0 / 138.0,
    -236_364_091.0 / 2730.0,
    8_553_103.0 / 6.0,
    -23_749_461_029.0 / 870.0,
    8_615_841_276_005.0 / 14322.0,
];

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn asymptotic(m: u32, x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    if m == 0 {
        let mut sum = x.ln() - 0.5 * inv;
        let mut pow = inv2;
        for (k, b) in BERNOULLI.iter().enumerate() {
            let term = b / (2.0 * (k + 1) as f64) * pow;
            sum -= term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            pow *= inv2;
        }
        return sum;
    }
    let mf = f64::from(m);
    // (-1)^{m+1} [ (m-1)!/x^m + m!/(2 x^{m+1}) + sum B_2k (2k+m-1)!/((2k)! x^{2k+m}) ]
    let xm = x.powi(m as i32);
    let mut sum = factorial(m - 1) / xm + factorial(m) / (2.0 * xm * x);
    // ratio (2k+m-1)!/(2k)! built incrementally
    let mut ratio = factorial(m + 1) / 2.0; // k = 1: (m+1)!/2!
    let mut pow = inv2 / xm;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = (k + 1) as f64;
        let term = b * ratio * pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        // advance k -> k+1: multiply by (2k+m)(2k+m+1) / ((2k+1)(2k+2))
        ratio *= (2.0 * k + mf) * (2.0 * k + mf + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
        pow *= inv2;
    }
    if m % 2 == 1 {
        sum
    } else {
        -sum
    }
}

/// `psi^(m)(x)`, the `(m+1)`-th derivative of `ln Gamma`, for `x > 0` and
/// `m <= 12`.
pub fn polygamma(m: u32, x: f64) -> Result<f64> {
    if m > MAX_POLYGAMMA_ORDER {
        return domain(format!("polygamma order {m} exceeds {MAX_POLYGAMMA_ORDER}"));
    }
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return domain(format!("polygamma requires finite x > 0, got {x}"));
    }
    // psi^(m)(x) = psi^(m)(x + n) + (-1)^{m+1} m! sum_{k<n} (x + k)^{-(m+1)}
    let mut shifted = x;
    let mut acc = 0.0;
    while shifted < SHIFT_TO {
        acc += shifted.powi(-(m as i32 + 1));
        shifted += 1.0;
    }
    let tail = asymptotic(m, shifted);
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    Ok(tail + sign * factorial(m) * acc)
}
