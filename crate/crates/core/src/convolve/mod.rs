//! Linear combinations `Y = sum lambda_j Y_j` of independent log-Lambert W x
//! chi-squared and plain chi-squared variables.
//!
//! The CF of `Y` is the product of the term CFs at `lambda_j t`; CDF and PDF
//! come from Gil-Pelaez inversion of that product.

mod inversion;

pub use inversion::wynn_epsilon;

use crate::error::{domain, Error, Result};
use crate::lwdist::{CumulantSet, LWChiSquared, MAX_CUMULANT_ORDER};
use crate::specfun::Complex64;
use inversion::{Inversion, Target};

/// Distribution of a single summand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermKind {
    LwChi2(LWChiSquared),
    /// Plain chi-squared with the given degrees of freedom.
    Chi2(f64),
}

/// One weighted summand `lambda * Y_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    kind: TermKind,
    coefficient: f64,
}

impl Term {
    pub fn lw_chi2(dist: LWChiSquared, coefficient: f64) -> Result<Self> {
        Self::check_coefficient(coefficient)?;
        Ok(Self { kind: TermKind::LwChi2(dist), coefficient })
    }

    pub fn chi2(nu: f64, coefficient: f64) -> Result<Self> {
        Self::check_coefficient(coefficient)?;
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("chi-squared degrees of freedom must be positive, got {nu}"));
        }
        Ok(Self { kind: TermKind::Chi2(nu), coefficient })
    }

    fn check_coefficient(c: f64) -> Result<()> {
        if c == 0.0 || !c.is_finite() {
            return domain(format!("term coefficient must be finite and nonzero, got {c}"));
        }
        Ok(())
    }

    pub fn kind(&self) -> &TermKind {
        &self.kind
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn nu(&self) -> f64 {
        match self.kind {
            TermKind::LwChi2(d) => d.nu(),
            TermKind::Chi2(nu) => nu,
        }
    }

    /// Lower end of the unscaled term's support.
    fn support_start(&self) -> f64 {
        match self.kind {
            TermKind::LwChi2(d) => d.y_min(),
            TermKind::Chi2(_) => 0.0,
        }
    }

    /// `ln(cf(lambda t) e^{-i lambda t s})` with `s` the support start.
    pub(crate) fn ln_cf_centered(&self, t: f64) -> Complex64 {
        let s = self.coefficient * t;
        match self.kind {
            TermKind::LwChi2(d) => d.ln_cf_centered(s),
            TermKind::Chi2(nu) => -0.5 * nu * Complex64::new(1.0, -2.0 * s).ln(),
        }
    }

    /// `|cf(lambda t)|`.
    pub(crate) fn cf_modulus(&self, t: f64) -> f64 {
        let s = self.coefficient * t;
        match self.kind {
            TermKind::LwChi2(d) => d.ln_cf_centered(s).re.exp(),
            TermKind::Chi2(nu) => (1.0 + 4.0 * s * s).powf(-0.25 * nu),
        }
    }

    /// Exponent of the power-law decay of `|cf|`.
    fn decay_order(&self) -> f64 {
        match self.kind {
            TermKind::LwChi2(_) => 0.5,
            TermKind::Chi2(nu) => 0.5 * nu,
        }
    }

    /// Scale in `t` beyond which the term CF is in its asymptotic regime.
    fn asymptotic_scale(&self) -> f64 {
        let base = match self.kind {
            TermKind::LwChi2(d) => {
                let th = d.theta();
                (0.5 * d.nu() / th.theta2()).max(0.5 / th.theta3())
            }
            TermKind::Chi2(_) => 0.5,
        };
        10.0 * base / self.coefficient.abs()
    }

    fn cumulants(&self, order: usize) -> Result<Vec<f64>> {
        let raw = match self.kind {
            TermKind::LwChi2(d) => d.raw_cumulants(order)?,
            TermKind::Chi2(nu) => {
                let mut k = Vec::with_capacity(order);
                let mut fact = 1.0; // (j - 1)!
                for j in 1..=order {
                    if j > 1 {
                        fact *= (j - 1) as f64;
                    }
                    k.push(2f64.powi(j as i32 - 1) * fact * nu);
                }
                k
            }
        };
        let mut pow = 1.0;
        Ok(raw
            .into_iter()
            .map(|kj| {
                pow *= self.coefficient;
                kj * pow
            })
            .collect())
    }
}

/// Weighted sum of independent terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCombination {
    terms: Vec<Term>,
}

impl LinearCombination {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("a linear combination needs at least one term".into()));
        }
        Ok(Self { terms })
    }

    pub fn single(term: Term) -> Self {
        Self { terms: vec![term] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `sum lambda_j s_j` over the term support starts; the point where the
    /// density of a combination with positive weights begins.
    pub fn singular_point(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient * t.support_start()).sum()
    }

    /// Lower end of the support when every coefficient is positive.
    pub fn support_lower(&self) -> Option<f64> {
        self.terms.iter().all(|t| t.coefficient > 0.0).then(|| self.singular_point())
    }

    /// Upper end of the support when every coefficient is negative.
    pub fn support_upper(&self) -> Option<f64> {
        self.terms.iter().all(|t| t.coefficient < 0.0).then(|| self.singular_point())
    }

    /// Total power-law decay exponent of `|cf|`.
    pub fn decay_order(&self) -> f64 {
        self.terms.iter().map(Term::decay_order).sum()
    }

    pub(crate) fn asymptotic_scale(&self) -> f64 {
        self.terms.iter().map(Term::asymptotic_scale).fold(0.0, f64::max)
    }

    /// `ln(cf(t) e^{-i t w0})` with `w0` the singular point.
    pub(crate) fn ln_cf_centered(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.ln_cf_centered(t)).sum()
    }

    pub(crate) fn cf_modulus(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.cf_modulus(t)).product()
    }
}

/// Controls for the CF inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub max_nodes: usize,
    pub truncation_cf_floor: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_nodes: 1_000_000, truncation_cf_floor: 1e-14 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return domain(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_nodes < 1000 {
            return domain(format!("max_nodes must be at least 1000, got {}", self.max_nodes));
        }
        if !(self.truncation_cf_floor > 0.0) || self.truncation_cf_floor >= 1.0 {
            return domain("truncation_cf_floor must lie in (0, 1)");
        }
        Ok(())
    }
}

/// `cf_Y(t) = prod cf_j(lambda_j t)`.
pub fn combo_cf(c: &LinearCombination, t: f64) -> Complex64 {
    (c.ln_cf_centered(t) + Complex64::new(0.0, t * c.singular_point())).exp()
}

/// Cumulants by additivity: `kappa_j(Y) = sum lambda^j kappa_j(Y_j)`.
pub fn combo_cumulants(c: &LinearCombination, max_order: usize) -> Result<CumulantSet> {
    if max_order == 0 || max_order > MAX_CUMULANT_ORDER {
        return domain(format!("cumulant order must lie in 1..={MAX_CUMULANT_ORDER}, got {max_order}"));
    }
    let n = max_order.max(4);
    let mut total = vec![0.0; n];
    for term in c.terms() {
        for (acc, k) in total.iter_mut().zip(term.cumulants(n)?) {
            *acc += k;
        }
    }
    Ok(CumulantSet::from_cumulants(&total, max_order))
}

/// Gil-Pelaez CDF: `1/2 - (1/pi) int_0^inf Im(e^{-ity} cf(t)) / t dt`.
pub fn combo_cdf(c: &LinearCombination, y: f64, q: &QuadratureSettings) -> Result<f64> {
    Ok(combo_cdf_many(c, &[y], q)?[0])
}

/// Gil-Pelaez PDF: `(1/pi) int_0^inf Re(e^{-ity} cf(t)) dt`.
pub fn combo_pdf(c: &LinearCombination, y: f64, q: &QuadratureSettings) -> Result<f64> {
    Ok(combo_pdf_many(c, &[y], q)?[0])
}

/// CDF at many points, sharing the CF evaluations between them.
pub fn combo_cdf_many(c: &LinearCombination, ys: &[f64], q: &QuadratureSettings) -> Result<Vec<f64>> {
    Inversion::new(c, q)?.evaluate(ys, Target::Cdf)
}

/// PDF at many points, sharing the CF evaluations between them.
pub fn combo_pdf_many(c: &LinearCombination, ys: &[f64], q: &QuadratureSettings) -> Result<Vec<f64>> {
    Inversion::new(c, q)?.evaluate(ys, Target::Pdf)
}

/// `y` with `cdf(y) = p`, by safeguarded regula falsi on the inverted CDF.
pub fn combo_quantile(c: &LinearCombination, p: f64, q: &QuadratureSettings) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("probability must lie in (0, 1), got {p}"));
    }
    Inversion::new(c, q)?.quantile(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lwdist::standard_lw_chi2;
    use crate::specfun::reg_lower_inc_gamma;

    fn lw(nu: f64) -> Term {
        Term::lw_chi2(standard_lw_chi2(nu).unwrap(), 1.0).unwrap()
    }

    fn null_combination() -> LinearCombination {
        let mut terms: Vec<Term> = (0..9).map(|_| lw(1.0)).collect();
        terms.push(lw(100.0));
        LinearCombination::new(terms).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(LinearCombination::new(vec![]).is_err());
        assert!(Term::chi2(0.0, 1.0).is_err());
        assert!(Term::chi2(1.0, 0.0).is_err());
        let q = QuadratureSettings { max_nodes: 10, ..Default::default() };
        assert!(q.validate().is_err());
    }

    #[test]
    fn cf_products() {
        let single = LinearCombination::single(lw(3.0));
        let d = standard_lw_chi2(3.0).unwrap();
        for &t in &[0.0, 0.4, -2.0, 30.0] {
            assert!((combo_cf(&single, t) - d.cf(t)).norm() < 1e-14);
        }
        let two = LinearCombination::new(vec![
            Term::chi2(1.0, 1.0).unwrap(),
            Term::chi2(1.0, 1.0).unwrap(),
        ])
        .unwrap();
        for &t in &[0.3, -1.2, 8.0] {
            let want = Complex64::new(1.0, -2.0 * t).inv();
            assert!((combo_cf(&two, t) - want).norm() < 1e-15);
        }
        let combo = null_combination();
        assert!(combo_cf(&combo, 0.1).norm() < 1.0);
        assert_eq!(combo_cf(&combo, 0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cumulant_additivity() {
        let d = standard_lw_chi2(4.0).unwrap();
        let single = LinearCombination::single(Term::lw_chi2(d, 1.0).unwrap());
        assert_eq!(combo_cumulants(&single, 6).unwrap(), d.cumulants(6).unwrap());
        let scaled = LinearCombination::single(Term::lw_chi2(d, -2.5).unwrap());
        let k = combo_cumulants(&scaled, 3).unwrap();
        let k0 = d.cumulants(3).unwrap();
        assert!((k.kappa[1] - 6.25 * k0.kappa[1]).abs() < 1e-12);
        assert!((k.kappa[2] + 15.625 * k0.kappa[2]).abs() < 1e-10);
        let chi = LinearCombination::single(Term::chi2(7.0, 1.0).unwrap());
        let kc = combo_cumulants(&chi, 4).unwrap();
        assert_eq!(kc.kappa, vec![7.0, 14.0, 56.0, 336.0]);
    }

    #[test]
    fn chi2_ten_cdf_and_quantile() {
        let q = QuadratureSettings::default();
        let c = LinearCombination::single(Term::chi2(10.0, 1.0).unwrap());
        let v = combo_cdf(&c, 18.3070, &q).unwrap();
        assert!((v - 0.95).abs() < 1e-3);
        for &y in &[0.5, 3.0, 9.0, 18.307, 40.0] {
            let want = reg_lower_inc_gamma(5.0, 0.5 * y).unwrap();
            let got = combo_cdf(&c, y, &q).unwrap();
            assert!((got - want).abs() < 1e-8, "y={y} {got} {want}");
        }
        let x = combo_quantile(&c, 0.95, &q).unwrap();
        assert!((x - 18.3070).abs() < 1e-3);
    }

    #[test]
    fn chi2_two_pdf_is_exponential() {
        let q = QuadratureSettings::default();
        let c = LinearCombination::single(Term::chi2(2.0, 1.0).unwrap());
        let ys: Vec<f64> = (0..60).map(|i| 0.1 + i as f64 * (19.9 / 59.0)).collect();
        let got = combo_pdf_many(&c, &ys, &q).unwrap();
        for (y, g) in ys.iter().zip(got) {
            let want = 0.5 * (-0.5 * y).exp();
            assert!((g - want).abs() < 1e-8, "y={y} {g} {want}");
        }
    }

    #[test]
    fn single_lw_matches_closed_forms() {
        let q = QuadratureSettings::default();
        for &nu in &[1.0, 3.0, 5.0] {
            let d = standard_lw_chi2(nu).unwrap();
            let c = LinearCombination::single(Term::lw_chi2(d, 1.0).unwrap());
            let ys = [0.002, 0.05, 0.4, 1.0, 2.0, 4.5, 9.0];
            let cdf = combo_cdf_many(&c, &ys, &q).unwrap();
            let pdf = combo_pdf_many(&c, &ys, &q).unwrap();
            for (i, &y) in ys.iter().enumerate() {
                let want_c = d.cdf(y).unwrap();
                let want_p = d.pdf(y).unwrap();
                assert!((cdf[i] - want_c).abs() < 1e-8, "nu={nu} y={y} cdf {} {want_c}", cdf[i]);
                assert!((pdf[i] - want_p).abs() < 1e-8, "nu={nu} y={y} pdf {} {want_p}", pdf[i]);
            }
        }
    }

    #[test]
    fn null_combination_quantile() {
        let q = QuadratureSettings::default();
        let c = null_combination();
        let x = combo_quantile(&c, 0.95, &q).unwrap();
        assert!((x - 22.2689).abs() < 2e-3, "{x}");
        let v = combo_cdf(&c, 22.2689, &q).unwrap();
        assert!((v - 0.95).abs() < 2e-3);
    }

    #[test]
    fn pdf_refuses_only_at_divergent_point() {
        let q = QuadratureSettings::default();
        let c = LinearCombination::single(lw(2.0));
        assert!(matches!(combo_pdf(&c, 0.0, &q), Err(Error::Convergence(_))));
        assert_eq!(combo_pdf(&c, -1.0, &q).unwrap(), 0.0);
        assert_eq!(combo_cdf(&c, -1.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn negative_coefficients() {
        let q = QuadratureSettings::default();
        let c = LinearCombination::new(vec![
            Term::chi2(4.0, 1.0).unwrap(),
            Term::chi2(4.0, -1.0).unwrap(),
        ])
        .unwrap();
        // symmetric about zero
        assert!((combo_cdf(&c, 0.0, &q).unwrap() - 0.5).abs() < 1e-9);
        let a = combo_cdf(&c, 2.0, &q).unwrap();
        let b = combo_cdf(&c, -2.0, &q).unwrap();
        assert!((a + b - 1.0).abs() < 1e-9);
        let m = combo_quantile(&c, 0.5, &q).unwrap();
        assert!(m.abs() < 1e-6);
    }
}
