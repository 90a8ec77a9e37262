//! Closed forms for the chi-squared base: CF, MGF and cumulants.

use super::base::ChiSquared;
use super::{lw_cdf, lw_pdf, lw_sf, quantile_from, Theta};
use crate::config::Tolerances;
use crate::error::{domain, Result};
use crate::specfun::{
    complex_ln_1p, ln_gamma, ln_gamma_complex, polygamma, stirling_remainder,
    stirling_series_complex, Complex64,
};
use std::f64::consts::LN_2;

/// Highest cumulant order exposed.
pub const MAX_CUMULANT_ORDER: usize = 8;

// Stirling form of the CF is used once |nu/2 - i t theta2| reaches this.
const CF_STIRLING_MIN: f64 = 10.0;

/// Cumulants `kappa_1..kappa_m` with the derived moment ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSet {
    pub kappa: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// `kappa_4 / kappa_2^2`.
    pub kurtosis_excess_ratio: f64,
}

impl CumulantSet {
    /// `all` must hold at least four cumulants; `kappa` keeps the first `order`.
    pub(crate) fn from_cumulants(all: &[f64], order: usize) -> Self {
        let k2 = all[1];
        Self {
            kappa: all[..order].to_vec(),
            mean: all[0],
            variance: k2,
            skewness: all[2] / k2.powf(1.5),
            kurtosis_excess_ratio: all[3] / (k2 * k2),
        }
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_CUMULANT_ORDER {
        return domain(format!("cumulant order must lie in 1..={MAX_CUMULANT_ORDER}, got {order}"));
    }
    Ok(())
}

/// Log-Lambert W x chi-squared distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LWChiSquared {
    nu: f64,
    theta: Theta,
    base: ChiSquared,
}

impl LWChiSquared {
    pub fn new(nu: f64, theta: Theta) -> Result<Self> {
        Ok(Self { nu, theta, base: ChiSquared::new(nu)? })
    }

    /// `theta = (nu (ln nu - 1), nu, 1)`; the support starts at 0.
    pub fn standard(nu: f64) -> Result<Self> {
        Self::new(nu, Theta::standard(nu)?)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn base(&self) -> &ChiSquared {
        &self.base
    }

    pub fn y_min(&self) -> f64 {
        self.theta.y_min()
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        lw_cdf(&self.base, &self.theta, y)
    }

    /// `1 - cdf(y)` without cancellation in the upper tail.
    pub fn sf(&self, y: f64) -> Result<f64> {
        lw_sf(&self.base, &self.theta, y)
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        lw_pdf(&self.base, &self.theta, y)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let k = self.cumulants(2)?;
        let sigmas = Tolerances::DEFAULT.quantile_bracket_sigmas;
        let guess = k.mean + sigmas * k.variance.sqrt();
        quantile_from(&self.base, &self.theta, p, guess.is_finite().then_some(guess))
    }

    /// `ln(cf(t) e^{-i t y_min})`.
    ///
    /// For large `|nu/2 - i t theta2|` the Stirling series is folded into the
    /// closed form so that the large phases `t theta1` and `arg Gamma` cancel
    /// analytically instead of numerically.
    pub(crate) fn ln_cf_centered(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = 0.5 * self.nu;
        let t2 = self.theta.theta2();
        let rho = self.theta.x_at_min();
        let z = Complex64::new(a, -t * t2);
        if z.norm() >= CF_STIRLING_MIN {
            let v = Complex64::new(0.5 * rho, -t * t2);
            let delta = (a - 0.5 * rho) / v;
            let c = a * (rho / (2.0 * a)).ln() + 0.5 * a.ln() - stirling_remainder(a);
            let zlog = if delta == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                z * complex_ln_1p(delta)
            };
            return stirling_series_complex(z) - 0.5 * z.ln() + zlog + c;
        }
        self.ln_cf_direct(t) - Complex64::new(0.0, t * self.theta.y_min())
    }

    /// `ln cf(t)` straight from the gamma-function form.
    pub(crate) fn ln_cf_direct(&self, t: f64) -> Complex64 {
        let a = 0.5 * self.nu;
        let z = Complex64::new(a, -t * self.theta.theta2());
        let w = Complex64::new(0.5, -t * self.theta.theta3());
        let lg = ln_gamma_complex(z).expect("Re z = nu/2 > 0");
        let lg_a = ln_gamma(a).expect("nu > 0");
        Complex64::new(-a * LN_2 - lg_a, t * self.theta.theta1()) + lg - z * w.ln()
    }

    /// Characteristic function `E[e^{itY}]`.
    pub fn cf(&self, t: f64) -> Complex64 {
        (self.ln_cf_centered(t) + Complex64::new(0.0, t * self.theta.y_min())).exp()
    }

    /// Supremum of the MGF domain, `min(nu / theta2, 1 / theta3) / 2`.
    pub fn mgf_bound(&self) -> f64 {
        0.5 * (self.nu / self.theta.theta2()).min(1.0 / self.theta.theta3())
    }

    /// `E[e^{tY}]` for `t` below [`mgf_bound`](Self::mgf_bound).
    pub fn mgf(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t >= self.mgf_bound() {
            return domain(format!("mgf undefined at t = {t} (bound {})", self.mgf_bound()));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let a = 0.5 * self.nu;
        let [t1, t2, t3] = self.theta.as_array();
        let b = a - t * t2;
        let ln_m = t * t1 - a * LN_2 - ln_gamma(a)? + ln_gamma(b)? - b * (0.5 - t * t3).ln();
        Ok(ln_m.exp())
    }

    /// Cumulants up to `max_order` (at most 8).
    pub fn cumulants(&self, max_order: usize) -> Result<CumulantSet> {
        check_order(max_order)?;
        let all = self.raw_cumulants(max_order.max(4))?;
        Ok(CumulantSet::from_cumulants(&all, max_order))
    }

    pub(crate) fn raw_cumulants(&self, order: usize) -> Result<Vec<f64>> {
        let nu = self.nu;
        let a = 0.5 * nu;
        let [t1, t2, t3] = self.theta.as_array();
        let mut k = Vec::with_capacity(order);
        k.push(t1 - t2 * LN_2 + nu * t3 - t2 * polygamma(0, a)?);
        let mut fact = 1.0; // (j - 2)!
        for j in 2..=order {
            if j > 2 {
                fact *= (j - 2) as f64;
            }
            let jf = j as f64;
            let lin = 2f64.powi(j as i32 - 1)
                * fact
                * t3.powi(j as i32 - 1)
                * ((jf - 1.0) * nu * t3 - jf * t2);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            k.push(lin + sign * t2.powi(j as i32) * polygamma(j as u32 - 1, a)?);
        }
        Ok(k)
    }
}

/// Standard log-Lambert W x chi-squared with `nu` degrees of freedom.
pub fn standard_lw_chi2(nu: f64) -> Result<LWChiSquared> {
    LWChiSquared::standard(nu)
}

pub fn lw_chi2_cf(d: &LWChiSquared, t: f64) -> Complex64 {
    d.cf(t)
}

pub fn lw_chi2_mgf(d: &LWChiSquared, t: f64) -> Result<f64> {
    d.mgf(t)
}

pub fn lw_chi2_cumulants(d: &LWChiSquared, max_order: usize) -> Result<CumulantSet> {
    d.cumulants(max_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lwdist::{transform, BaseDistribution};
    use crate::specfun::EULER_GAMMA;
    use std::f64::consts::PI;

    /// E[e^{it g(X)}] integrated over ln X with the trapezoid rule, which is
    /// spectrally accurate for this smooth, rapidly decaying integrand.
    fn cf_by_substitution(d: &LWChiSquared, t: f64) -> Complex64 {
        let (lo, hi, n) = (-60.0, 7.0, 400_000);
        let h = (hi - lo) / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let v = lo + i as f64 * h;
            let x = f64::exp(v);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let y = transform(d.theta(), x).unwrap();
            let f = d.base().pdf(x).unwrap() * x;
            acc += Complex64::new(0.0, t * y).exp() * (w * f);
        }
        acc * h
    }

    #[test]
    fn cf_basic_properties() {
        let d = standard_lw_chi2(2.0).unwrap();
        assert_eq!(d.cf(0.0), Complex64::new(1.0, 0.0));
        for &t in &[0.1, 1.0, 7.0, 250.0] {
            let a = d.cf(t);
            let b = d.cf(-t);
            assert!((a - b.conj()).norm() < 1e-14);
            assert!(a.norm() <= 1.0);
        }
        assert!(d.cf(5.0).norm() < 1.0);
    }

    #[test]
    fn cf_matches_substitution_quadrature() {
        for &(nu, t) in &[(2.0, 0.3), (1.0, 1.7), (5.0, -0.8), (30.0, 2.5)] {
            let d = standard_lw_chi2(nu).unwrap();
            let got = d.cf(t);
            let want = cf_by_substitution(&d, t);
            assert!((got - want).norm() < 1e-10, "nu={nu} t={t} {got} {want}");
        }
        let d = LWChiSquared::new(3.0, Theta::new(0.7, 1.3, 0.4).unwrap()).unwrap();
        let got = d.cf(1.1);
        let want = cf_by_substitution(&d, 1.1);
        assert!((got - want).norm() < 1e-10, "{got} {want}");
    }

    #[test]
    fn stirling_and_direct_forms_agree() {
        let cases = [
            LWChiSquared::standard(1.0).unwrap(),
            LWChiSquared::standard(40.0).unwrap(),
            LWChiSquared::new(3.0, Theta::new(0.7, 1.3, 0.4).unwrap()).unwrap(),
            LWChiSquared::new(
                1.0,
                Theta::standard_scaled(1.0, 2.92).unwrap(),
            )
            .unwrap(),
        ];
        for d in &cases {
            for &t in &[-31.0, -8.0, 9.0, 12.5, 40.0, 300.0] {
                let direct = d.ln_cf_direct(t) - Complex64::new(0.0, t * d.y_min());
                let fast = d.ln_cf_centered(t);
                let diff = (direct - fast).exp();
                assert!((diff - 1.0).norm() < 1e-11, "t={t} {direct} {fast}");
            }
        }
    }

    #[test]
    fn mgf_values() {
        let d = standard_lw_chi2(3.0).unwrap();
        assert_eq!(d.mgf(0.0).unwrap(), 1.0);
        assert_eq!(d.mgf_bound(), 0.5);
        assert!(d.mgf(0.25).unwrap().is_finite());
        assert!(d.mgf(0.5).is_err());
        // mgf(t) = cf(-it): compare against the series exp(sum kappa_j t^j / j!)
        let k = d.cumulants(8).unwrap();
        let t = 0.02f64;
        let mut s = 0.0;
        let mut f = 1.0;
        for (j, kj) in k.kappa.iter().enumerate() {
            f *= (j + 1) as f64;
            s += kj * t.powi(j as i32 + 1) / f;
        }
        assert!((d.mgf(t).unwrap() - s.exp()).abs() < 1e-12);
    }

    #[test]
    fn cumulant_values() {
        let d = standard_lw_chi2(2.0).unwrap();
        let k = d.cumulants(4).unwrap();
        assert!((k.mean - 2.0 * EULER_GAMMA).abs() < 1e-14);
        assert!((k.mean - 1.154_431_329_8).abs() < 1e-10);
        assert!((k.variance - (-4.0 + 4.0 * PI * PI / 6.0)).abs() < 1e-13);
        assert!((k.variance - 2.579_736_267_3).abs() < 1e-10);
        assert_eq!(k.kappa.len(), 4);
        assert!((k.skewness - k.kappa[2] / k.kappa[1].powf(1.5)).abs() < 1e-15);
        assert!(d.cumulants(0).is_err());
        assert!(d.cumulants(9).is_err());
        assert_eq!(d.cumulants(1).unwrap().kappa.len(), 1);
    }

    #[test]
    fn cumulants_match_log_mgf_derivatives() {
        let d = LWChiSquared::new(4.5, Theta::new(-0.3, 1.7, 0.6).unwrap()).unwrap();
        let k = d.cumulants(3).unwrap();
        let h = 1e-3;
        let lm = |t: f64| d.mgf(t).unwrap().ln();
        let d1 = (lm(h) - lm(-h)) / (2.0 * h);
        let d2 = (lm(h) - 2.0 * lm(0.0) + lm(-h)) / (h * h);
        assert!((d1 - k.kappa[0]).abs() < 1e-5 * k.kappa[0].abs().max(1.0));
        assert!((d2 - k.kappa[1]).abs() < 1e-4 * k.kappa[1]);
    }

    #[test]
    fn quantile_round_trip() {
        for &nu in &[0.7, 3.0, 100.0, 1e6] {
            let d = standard_lw_chi2(nu).unwrap();
            for &p in &[0.001, 0.3, 0.9, 0.999] {
                let q = d.quantile(p).unwrap();
                assert!((d.cdf(q).unwrap() - p).abs() < 1e-8, "nu={nu} p={p}");
                let y = d.quantile(d.cdf(q).unwrap()).unwrap();
                assert!((y - q).abs() < 1e-7, "nu={nu} p={p}");
            }
        }
    }
}
