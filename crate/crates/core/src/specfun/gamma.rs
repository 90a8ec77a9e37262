//! Real and complex log-gamma.
//!
//! Lanczos approximation with Godfrey's coefficients (g = 607/128, 15 terms)
//! for moderate arguments, the Stirling series for large real arguments.

use crate::error::{domain, Result};
use num_complex::Complex64;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)), k = 1..10.
const STIRLING_COEF: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const STIRLING_MIN: f64 = 10.0;

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut sum = 0.0;
    for c in STIRLING_COEF.iter().take(8) {
        sum += c * pow;
        pow *= inv2;
    }
    sum
}

/// Stirling series remainder `S(z)` for complex `z` with `|z| >= 10`, `Re z > 0`:
/// `ln Gamma(z) = (z - 1/2) ln z - z + ln(2 pi)/2 + S(z)`.
pub(crate) fn stirling_series_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut sum = Complex64::new(0.0, 0.0);
    for c in STIRLING_COEF.iter().take(8) {
        sum += pow * *c;
        pow *= inv2;
    }
    sum
}

/// `ln Gamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2]` for `a > 0`.
pub fn stirling_remainder(a: f64) -> f64 {
    if a >= STIRLING_MIN {
        stirling_series(a)
    } else {
        lanczos_real(a) - ((a - 0.5) * a.ln() - a + HALF_LN_2PI)
    }
}

fn lanczos_real(x: f64) -> f64 {
    if x < 0.5 {
        return lanczos_real(x + 1.0) - x.ln();
    }
    let zz = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (zz + k as f64);
    }
    let t = zz + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zz + 0.5) * t.ln() - t + acc.ln()
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x >= STIRLING_MIN {
        Ok((x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_series(x))
    } else {
        Ok(lanczos_real(x))
    }
}

fn lanczos_complex(z: Complex64) -> Complex64 {
    let zz = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += *c / (zz + k as f64);
    }
    let t = zz + (LANCZOS_G + 0.5);
    (zz + 0.5) * t.ln() - t + acc.ln() + HALF_LN_2PI
}

/// Principal branch of `ln Gamma(z)`, continuous off the nonpositive real axis.
///
/// For `Re z < 1/2` the argument is shifted right with
/// `ln Gamma(z) = ln Gamma(z + n) - sum ln(z + k)`, which keeps the branch
/// continuous.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return domain(format!("ln_gamma_complex requires a finite argument, got {z}"));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return domain(format!("ln_gamma_complex has a pole at {z}"));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_complex(z));
    }
    let shift = (0.5 - z.re).ceil();
    if shift > 1e6 {
        return domain(format!("ln_gamma_complex argument too far left: {z}"));
    }
    let n = shift as usize;
    let mut correction = Complex64::new(0.0, 0.0);
    for k in 0..n {
        correction += (z + k as f64).ln();
    }
    Ok(lanczos_complex(z + n as f64) - correction)
}
