//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One panel: `(integral, error estimate, roundoff floor)`, with the
/// QUADPACK error scaling.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv = [(0.0, 0.0); 7];
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = (f(c - x), f(c + x));
        fv[i] = pair;
        k += WGK[i] * (pair.0 + pair.1);
        abs += WGK[i] * (pair.0.abs() + pair.1.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (pair.0 + pair.1);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        asc += WGK[i] * ((fv[i].0 - mean).abs() + (fv[i].1 - mean).abs());
    }
    let (abs, asc) = (abs * h.abs(), asc * h.abs());
    let mut err = ((k - g) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs;
    (k * h, err.max(floor), floor)
}

/// Integral of `f` over the finite interval `[a, b]`, bisecting the worst
/// panel until the summed error estimate is below `max(abs_tol, rel_tol |I|)`
/// or every panel has reached its roundoff floor.
/// Returns `(value, error_estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if !a.is_finite() || !b.is_finite() {
        return domain("integration limits must be finite");
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    const MAX_PANELS: usize = 20_000;
    let mut panels = vec![{
        let (v, e, r) = gk15(&mut f, a, b);
        (a, b, v, e, r)
    }];
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::Convergence("integrand is not finite".into()));
        }
        let floor: f64 = panels.iter().map(|p| p.4).sum();
        if err <= abs_tol.max(rel_tol * value.abs()) || err <= floor {
            return Ok((value, err));
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Convergence(format!("quadrature error {err:e} after {MAX_PANELS} panels")));
        }
        let worst = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).unwrap();
        let (lo, hi, _, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            return Err(Error::Convergence("panel width reached machine precision".into()));
        }
        let (v1, e1, r1) = gk15(&mut f, lo, mid);
        let (v2, e2, r2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1, r1));
        panels.push((mid, hi, v2, e2, r2));
    }
}

/// Integral over `[a, inf)` of an integrand that may behave like
/// `(x - a)^{-1/2}` at `a`. Uses `x = a + u^2` and `u = s / (1 - s)`,
/// which leaves a smooth integrand on `s in [0, 1)`.
pub fn integrate_from<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    integrate(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = s / (1.0 - s);
            let du = 1.0 / ((1.0 - s) * (1.0 - s));
            let v = f(a + u * u) * 2.0 * u * du;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_smooth() {
        let (v, _) = integrate(|x| x * x * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let (v, _) = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_and_tail() {
        // Gamma(1/2) = sqrt(pi)
        let (v, _) = integrate_from(|x| (-x).exp() / x.sqrt(), 0.0, 1e-13, 1e-13).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
        let (v, _) = integrate_from(|x| 1.0 / (1.0 + x * x), 0.0, 1e-12, 1e-12).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn rejects_infinite_limits() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-10, 0.0).is_err());
    }
}
