//! Base distributions on `[0, inf)` that the log-Lambert W transform acts on.

use crate::error::{domain, Result};
use crate::specfun::{gen_inc_gamma, ln_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma};

/// A continuous distribution supported on the nonnegative half-line.
pub trait BaseDistribution {
    fn cdf(&self, x: f64) -> Result<f64>;

    fn pdf(&self, x: f64) -> Result<f64>;

    fn name(&self) -> String;

    /// `cdf(hi) - cdf(lo)`. Override when a cancellation-free form exists.
    fn cdf_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok((self.cdf(hi)? - self.cdf(lo)?).max(0.0))
    }

    /// `1 - cdf(x)`.
    fn sf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(x)?)
    }
}

/// Chi-squared distribution with `nu` degrees of freedom (not necessarily integer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquared {
    nu: f64,
    ln_norm: f64,
}

impl ChiSquared {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("chi-squared degrees of freedom must be positive, got {nu}"));
        }
        let a = 0.5 * nu;
        Ok(Self { nu, ln_norm: a * std::f64::consts::LN_2 + ln_gamma(a)? })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Quantile by bisection on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return domain(format!("probability must lie in [0, 1), got {p}"));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let mut hi = self.nu + 10.0 * (2.0 * self.nu).sqrt() + 10.0;
        while self.cdf(hi)? < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? >= p {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

impl BaseDistribution for ChiSquared {
    fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        reg_lower_inc_gamma(0.5 * self.nu, 0.5 * x)
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        let a = 0.5 * self.nu;
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(match a {
                a if a < 1.0 => f64::INFINITY,
                a if a == 1.0 => 0.5,
                _ => 0.0,
            });
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        Ok(((a - 1.0) * x.ln() - 0.5 * x - self.ln_norm).exp())
    }

    fn name(&self) -> String {
        format!("chi2({})", self.nu)
    }

    fn cdf_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        gen_inc_gamma(0.5 * self.nu, 0.5 * lo.max(0.0), 0.5 * hi.max(0.0))
    }

    fn sf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        reg_upper_inc_gamma(0.5 * self.nu, 0.5 * x)
    }
}

/// Gamma distribution with the given shape and scale: `cdf(x) = P(shape, x / scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDist {
    shape: f64,
    scale: f64,
    ln_norm: f64,
}

impl GammaDist {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() || !(scale > 0.0) || !scale.is_finite() {
            return domain(format!("gamma requires shape, scale > 0, got ({shape}, {scale})"));
        }
        Ok(Self { shape, scale, ln_norm: shape * scale.ln() + ln_gamma(shape)? })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl BaseDistribution for GammaDist {
    fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        reg_lower_inc_gamma(self.shape, x / self.scale)
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_infinite() {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(match self.shape {
                k if k < 1.0 => f64::INFINITY,
                k if k == 1.0 => 1.0 / self.scale,
                _ => 0.0,
            });
        }
        Ok(((self.shape - 1.0) * x.ln() - x / self.scale - self.ln_norm).exp())
    }

    fn name(&self) -> String {
        format!("gamma({}, {})", self.shape, self.scale)
    }

    fn cdf_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        gen_inc_gamma(self.shape, lo.max(0.0) / self.scale, hi.max(0.0) / self.scale)
    }

    fn sf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        reg_upper_inc_gamma(self.shape, x / self.scale)
    }
}

/// The chi-squared base with `nu` degrees of freedom.
pub fn chi2_base(nu: f64) -> Result<ChiSquared> {
    ChiSquared::new(nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_closed_forms() {
        let c1 = chi2_base(1.0).unwrap();
        assert!((c1.cdf(3.8415).unwrap() - 0.95).abs() < 1e-5);
        let c2 = chi2_base(2.0).unwrap();
        for &x in &[0.1, 1.0, 4.0, 17.0] {
            assert!((c2.cdf(x).unwrap() - (1.0 - (-0.5 * x).exp())).abs() < 1e-15);
            assert!((c2.pdf(x).unwrap() - 0.5 * (-0.5 * x).exp()).abs() < 1e-15);
        }
        let c10 = chi2_base(10.0).unwrap();
        assert!((c10.cdf(18.3070).unwrap() - 0.95).abs() < 1e-5);
        assert!((c10.quantile(0.95).unwrap() - 18.307_038_053_275_146).abs() < 1e-9);
        assert!(chi2_base(0.0).is_err());
    }

    #[test]
    fn gamma_matches_chi2_with_scale_two() {
        let g = GammaDist::new(2.5, 2.0).unwrap();
        let c = chi2_base(5.0).unwrap();
        for &x in &[0.3, 2.0, 9.0] {
            assert!((g.cdf(x).unwrap() - c.cdf(x).unwrap()).abs() < 1e-15);
            assert!((g.pdf(x).unwrap() - c.pdf(x).unwrap()).abs() < 1e-15);
        }
        assert!((g.sf(9.0).unwrap() + g.cdf(9.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interval_and_survival() {
        let c = chi2_base(3.0).unwrap();
        let d = c.cdf_interval(1.0, 4.0).unwrap();
        assert!((d - (c.cdf(4.0).unwrap() - c.cdf(1.0).unwrap())).abs() < 1e-15);
        assert!((c.sf(40.0).unwrap() - (1.0 - c.cdf(40.0).unwrap())).abs() < 1e-15);
        assert!(c.sf(200.0).unwrap() > 0.0);
    }
}
