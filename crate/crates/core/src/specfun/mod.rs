//! Scalar special functions: real Lambert W branches, real and complex
//! log-gamma, regularized incomplete gamma and polygamma.
//!
//! Everything here is a pure function of its arguments.

mod gamma;
mod incgamma;
mod lambert;
mod polygamma;

pub use gamma::{ln_gamma, ln_gamma_complex, stirling_remainder};
pub(crate) use gamma::stirling_series_complex;
pub use incgamma::{gen_inc_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma};
pub use lambert::{lambert_w0, lambert_w_neg_exp, lambert_wm1, Branch, WNearBranch};
pub use polygamma::{polygamma, MAX_POLYGAMMA_ORDER};

pub use num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln(1 + x) - x`, accurate for small `|x|`.
///
/// Uses `ln(1+x) = 2 atanh(r)` with `r = x / (2 + x)`, which leaves
/// `-x r + 2 r^3 (1/3 + r^2/5 + ...)` without cancellation.
pub fn log1pmx(x: f64) -> f64 {
    if !(-0.5..=0.5).contains(&x) {
        return x.ln_1p() - x;
    }
    let r = x / (2.0 + x);
    let r2 = r * r;
    let mut term = 1.0f64;
    let mut sum = 0.0f64;
    let mut k = 3.0;
    loop {
        let add = term / k;
        sum += add;
        if add.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
        term *= r2;
        k += 2.0;
    }
    -x * r + 2.0 * r * r2 * sum
}

/// Complex `ln(1 + z)`, accurate for small `|z|`.
pub(crate) fn complex_ln_1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (z.re * (2.0 + z.re) + z.im * z.im).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}
