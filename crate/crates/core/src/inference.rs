//! Exact likelihood-ratio tests for normal models.
//!
//! Each statistic is a sum of terms `nu (r - 1 - ln r)` in a ratio of
//! chi-squared quantities, so its exact law is a log-Lambert W x chi-squared
//! distribution or a linear combination of them.

use nalgebra::{DMatrix, DVector};

use crate::convolve::{combo_cdf, combo_quantile, LinearCombination, QuadratureSettings, Term};
use crate::error::{domain, Error, Result};
use crate::lwdist::{branch_solutions, excess_over_min, BaseDistribution, ChiSquared, LWChiSquared, Theta};

/// Relative tolerance on the diagonal of R when checking the design rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Canonical variance-components data: distinct eigenvalues of the
/// covariance structure, their multiplicities and the sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct VarCompModel {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<u32>,
    sufficient_stats: Vec<f64>,
}

impl VarCompModel {
    pub fn new(eigenvalues: Vec<f64>, multiplicities: Vec<u32>, sufficient_stats: Vec<f64>) -> Result<Self> {
        let r = eigenvalues.len();
        if r == 0 {
            return Err(Error::InvalidInput("model needs at least one eigenvalue".into()));
        }
        if multiplicities.len() != r || sufficient_stats.len() != r {
            return Err(Error::InvalidInput(format!(
                "lengths differ: {} eigenvalues, {} multiplicities, {} statistics",
                r,
                multiplicities.len(),
                sufficient_stats.len()
            )));
        }
        if eigenvalues.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
            return domain("eigenvalues must be finite and nonnegative");
        }
        if eigenvalues.windows(2).any(|w| !(w[0] > w[1])) {
            return domain("eigenvalues must be strictly decreasing");
        }
        if multiplicities.iter().any(|&m| m == 0) {
            return domain("multiplicities must be positive");
        }
        if sufficient_stats.iter().any(|&u| !(u >= 0.0) || !u.is_finite()) {
            return domain("sufficient statistics must be finite and nonnegative");
        }
        Ok(Self { eigenvalues, multiplicities, sufficient_stats })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn sufficient_stats(&self) -> &[f64] {
        &self.sufficient_stats
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Sum of the multiplicities.
    pub fn total_dof(&self) -> u64 {
        self.multiplicities.iter().map(|&m| m as u64).sum()
    }

    /// REML estimates `U_i / nu_i`.
    pub fn reml_estimates(&self) -> Vec<f64> {
        self.sufficient_stats.iter().zip(&self.multiplicities).map(|(&u, &m)| u / m as f64).collect()
    }
}

/// A two-sided interval for a positive parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64, level: f64) -> Result<Self> {
        if !(lower > 0.0) || !(upper >= lower) || !upper.is_finite() {
            return domain(format!("invalid interval [{lower}, {upper}]"));
        }
        if !(level > 0.0 && level < 1.0) {
            return domain(format!("level must lie in (0, 1), got {level}"));
        }
        Ok(Self { lower, upper, level })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Statistic, exact critical value and p-value of a test at level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub null_quantile: f64,
    pub p_value: f64,
    pub alpha: f64,
}

impl TestOutcome {
    pub fn reject(&self) -> bool {
        self.statistic > self.null_quantile
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// `(nu S^2 / sigma0^2 - nu) - nu ln(S^2 / sigma0^2)`.
pub fn variance_lrt_statistic(s2: f64, sigma0_sq: f64, nu: f64) -> Result<f64> {
    check_positive("s2", s2)?;
    check_positive("sigma0_sq", sigma0_sq)?;
    check_positive("nu", nu)?;
    Ok(nu * excess_over_min(s2 / sigma0_sq))
}

/// Exact null law of the variance statistic: the standard LW x chi2_nu.
pub fn variance_lrt_null(nu: f64) -> Result<LWChiSquared> {
    LWChiSquared::standard(nu)
}

/// Exact test of `sigma^2 = sigma0^2` from `S^2` on `nu` degrees of freedom.
pub fn variance_lrt_test(s2: f64, sigma0_sq: f64, nu: f64, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let statistic = variance_lrt_statistic(s2, sigma0_sq, nu)?;
    let null = variance_lrt_null(nu)?;
    Ok(TestOutcome {
        statistic,
        null_quantile: null.quantile(1.0 - alpha)?,
        p_value: null.sf(statistic)?,
        alpha,
    })
}

/// Precomputed branch roots turning `S^2` into a variance interval.
///
/// The interval is `{sigma^2 : g(nu S^2 / sigma^2) <= q}` for the transform
/// `g` of the chosen statistic and its `1 - alpha` quantile `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceIntervalRule {
    nu: f64,
    level: f64,
    x_lower: f64,
    x_upper: f64,
}

impl VarianceIntervalRule {
    fn from_theta(theta: Theta, nu: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let q = LWChiSquared::new(nu, theta)?.quantile(1.0 - alpha)?;
        let (x_lower, x_upper) = branch_solutions(&theta, q)?;
        if !(x_lower > 0.0) {
            return domain("lower branch root underflowed");
        }
        Ok(Self { nu, level: 1.0 - alpha, x_lower, x_upper })
    }

    /// Inverts the exact LRT.
    pub fn lrt(nu: f64, alpha: f64) -> Result<Self> {
        Self::from_theta(Theta::standard(nu)?, nu, alpha)
    }

    /// Minimum-length rule, from `(Q - nu) - (nu + 2) ln(Q / nu)`.
    pub fn min_length(nu: f64, alpha: f64) -> Result<Self> {
        Self::from_theta(Theta::min_length(nu)?, nu, alpha)
    }

    /// Chi-squared quantities bounding the acceptance region.
    pub fn roots(&self) -> (f64, f64) {
        (self.x_lower, self.x_upper)
    }

    pub fn interval(&self, s2: f64) -> Result<ConfidenceInterval> {
        check_positive("s2", s2)?;
        let scale = self.nu * s2;
        ConfidenceInterval::new(scale / self.x_upper, scale / self.x_lower, self.level)
    }
}

/// Interval for `sigma^2` obtained by inverting the exact LRT.
pub fn variance_ci_lrt(s2: f64, nu: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_positive("s2", s2)?;
    VarianceIntervalRule::lrt(nu, alpha)?.interval(s2)
}

/// Minimum-length interval for `sigma^2`.
pub fn variance_ci_minlength(s2: f64, nu: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_positive("s2", s2)?;
    VarianceIntervalRule::min_length(nu, alpha)?.interval(s2)
}

/// LRT of `beta = beta0, sigma^2 = sigma0^2` in `y = X beta + e`,
/// `e ~ N(0, sigma^2 I)`.
pub fn regression_lrt_statistic(
    y: &[f64],
    x_design: &DMatrix<f64>,
    beta0: &[f64],
    sigma0_sq: f64,
) -> Result<f64> {
    let (n, k) = x_design.shape();
    if y.len() != n || beta0.len() != k {
        return Err(Error::InvalidInput(format!(
            "design is {n}x{k} but y has {} entries and beta0 has {}",
            y.len(),
            beta0.len()
        )));
    }
    if k == 0 || n <= k {
        return Err(Error::InvalidInput(format!("need n > k >= 1, got n = {n}, k = {k}")));
    }
    check_positive("sigma0_sq", sigma0_sq)?;
    if y.iter().chain(beta0).chain(x_design.iter()).any(|v| !v.is_finite()) {
        return domain("data must be finite");
    }

    let yv = DVector::from_column_slice(y);
    let scale = x_design.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = x_design.clone().qr();
    let r = qr.r();
    if r.diagonal().iter().any(|d| d.abs() <= RANK_TOLERANCE * scale) {
        return Err(Error::InvalidInput("design matrix is rank deficient".into()));
    }
    let qty = qr.q().transpose() * &yv;
    let beta_hat = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::InvalidInput("design matrix is rank deficient".into()))?;

    let rss = (&yv - x_design * beta_hat).norm_squared();
    let rss0 = (&yv - x_design * DVector::from_column_slice(beta0)).norm_squared();
    if !(rss > 0.0) {
        return domain("residual sum of squares is zero; the statistic diverges");
    }
    let nf = n as f64;
    let ratio = rss / (nf * sigma0_sq);
    // split as (RSS0 - RSS)/sigma0^2 + n (ratio - 1 - ln ratio)
    Ok(((rss0 - rss) / sigma0_sq).max(0.0) + nf * excess_over_min(ratio))
}

/// Exact null law of the regression statistic: `chi2_k` plus an
/// LW x chi2_{n-k} term whose theta is the standard one for `n`, not `n - k`.
pub fn regression_lrt_null(n: usize, k: usize) -> Result<LinearCombination> {
    if k == 0 || n <= k {
        return Err(Error::InvalidInput(format!("need n > k >= 1, got n = {n}, k = {k}")));
    }
    let lw = LWChiSquared::new((n - k) as f64, Theta::standard(n as f64)?)?;
    LinearCombination::new(vec![Term::chi2(k as f64, 1.0)?, Term::lw_chi2(lw, 1.0)?])
}

fn check_theta_vector(name: &str, v: &[f64], r: usize) -> Result<()> {
    if v.len() != r {
        return Err(Error::InvalidInput(format!("{name} has {} entries, model has {r}", v.len())));
    }
    if v.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return domain(format!("{name} entries must be positive and finite"));
    }
    Ok(())
}

/// `sum_i nu_i (r_i - 1 - ln r_i)` with `r_i = U_i / (nu_i theta0_i)`.
pub fn canonical_lrt_statistic(m: &VarCompModel, theta0: &[f64]) -> Result<f64> {
    check_theta_vector("theta0", theta0, m.len())?;
    if m.sufficient_stats.iter().any(|&u| u == 0.0) {
        return domain("a zero sufficient statistic makes the statistic infinite");
    }
    Ok(m.multiplicities
        .iter()
        .zip(&m.sufficient_stats)
        .zip(theta0)
        .map(|((&nu, &u), &t0)| {
            let nu = nu as f64;
            nu * excess_over_min(u / (nu * t0))
        })
        .sum())
}

/// Law of the canonical statistic when the true components are
/// `theta_true` (`None` means the null, `theta_true = theta0`).
pub fn canonical_lrt_distribution(
    m: &VarCompModel,
    theta0: &[f64],
    theta_true: Option<&[f64]>,
) -> Result<LinearCombination> {
    check_theta_vector("theta0", theta0, m.len())?;
    if let Some(tt) = theta_true {
        check_theta_vector("theta_true", tt, m.len())?;
    }
    let terms = m
        .multiplicities
        .iter()
        .enumerate()
        .map(|(i, &nu)| {
            let lambda = theta_true.map_or(1.0, |tt| tt[i] / theta0[i]);
            let nu = nu as f64;
            Term::lw_chi2(LWChiSquared::new(nu, Theta::standard_scaled(nu, lambda)?)?, 1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    LinearCombination::new(terms)
}

/// Exact canonical test at level `alpha`.
pub fn canonical_lrt_test(
    m: &VarCompModel,
    theta0: &[f64],
    alpha: f64,
    q: &QuadratureSettings,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let statistic = canonical_lrt_statistic(m, theta0)?;
    let null = canonical_lrt_distribution(m, theta0, None)?;
    Ok(TestOutcome {
        statistic,
        null_quantile: combo_quantile(&null, 1.0 - alpha, q)?,
        p_value: (1.0 - combo_cdf(&null, statistic, q)?).clamp(0.0, 1.0),
        alpha,
    })
}

/// The conventional large-sample test, comparing the statistic with
/// `chi2_dof`.
pub fn asymptotic_test(statistic: f64, dof: f64, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let chi2 = ChiSquared::new(dof)?;
    Ok(TestOutcome {
        statistic,
        null_quantile: chi2.quantile(1.0 - alpha)?,
        p_value: BaseDistribution::sf(&chi2, statistic.max(0.0))?,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolve::combo_cf;

    fn varcomp() -> VarCompModel {
        VarCompModel::new(
            vec![19.24, 17.04, 14.89, 12.77, 10.65, 8.53, 6.42, 4.30, 2.16, 0.00],
            vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 100],
            vec![0.65, 17.12, 2.76, 3.01, 0.45, 4.02, 0.52, 2.06, 0.90, 117.25],
        )
        .unwrap()
    }

    fn hypothesis(m: &VarCompModel, sigma1_sq: f64) -> Vec<f64> {
        m.eigenvalues().iter().map(|rho| sigma1_sq * rho + 1.0).collect()
    }

    #[test]
    fn variance_statistic_values() {
        assert_eq!(variance_lrt_statistic(2.5, 2.5, 7.0).unwrap(), 0.0);
        let v = variance_lrt_statistic(2.0, 1.0, 3.0).unwrap();
        assert!((v - 0.920_558_458_3).abs() < 1e-10);
        let v = variance_lrt_statistic(0.5, 1.0, 1.0).unwrap();
        assert!((v - 0.193_147_180_6).abs() < 1e-10);
        assert!(variance_lrt_statistic(0.0, 1.0, 1.0).is_err());
        assert!(variance_lrt_statistic(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn variance_null_quantiles() {
        for (nu, p, want) in [(1.0, 0.95, 4.7606), (30.0, 0.90, 2.7356), (5.0, 0.999, 11.4566)] {
            let got = variance_lrt_null(nu).unwrap().quantile(p).unwrap();
            assert!((got - want).abs() < 5e-4, "nu {nu} p {p}: {got}");
        }
    }

    #[test]
    fn intervals_contain_estimate_and_roots_match_quantile() {
        for &(s2, nu, alpha) in &[(1.3, 1.0, 0.05), (0.2, 5.0, 0.1), (7.0, 40.0, 0.01)] {
            let ci = variance_ci_lrt(s2, nu, alpha).unwrap();
            assert!(ci.contains(s2));
            let q = variance_lrt_null(nu).unwrap().quantile(1.0 - alpha).unwrap();
            for end in [ci.lower, ci.upper] {
                let stat = variance_lrt_statistic(s2, end, nu).unwrap();
                assert!((stat - q).abs() < 1e-8 * q.max(1.0), "{stat} vs {q}");
            }
            let ml = variance_ci_minlength(s2, nu, alpha).unwrap();
            assert!(ml.length() <= ci.length() * (1.0 + 1e-12));
            assert!(ml.lower < ml.upper);
        }
    }

    #[test]
    fn minlength_endpoints_balance_density() {
        // at the optimum x^2 f(x) is equal at both chi-squared endpoints
        let (s2, nu, alpha) = (1.0, 5.0, 0.05);
        let ci = variance_ci_minlength(s2, nu, alpha).unwrap();
        let xl = nu * s2 / ci.upper;
        let xu = nu * s2 / ci.lower;
        let h = |x: f64| (nu / 2.0 + 1.0) * x.ln() - x / 2.0;
        assert!((h(xl) - h(xu)).abs() < 1e-9);
        let chi = ChiSquared::new(nu).unwrap();
        assert!((chi.cdf(xu).unwrap() - chi.cdf(xl).unwrap() - 0.95).abs() < 1e-9);
    }

    #[test]
    fn regression_hand_example() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]);
        let v = regression_lrt_statistic(&[0.0, 0.0, 3.0], &x, &[0.0], 1.0).unwrap();
        assert!((v - 3.920_558_458_3).abs() < 1e-10);
    }

    #[test]
    fn regression_errors() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(matches!(
            regression_lrt_statistic(&[0.0, 1.0, 3.0], &x, &[0.0, 0.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]);
        assert!(regression_lrt_statistic(&[0.0, 1.0], &x, &[0.0], 1.0).is_err());
        assert!(regression_lrt_statistic(&[0.0, 1.0, 3.0], &x, &[0.0, 1.0], 1.0).is_err());
        assert!(regression_lrt_null(3, 0).is_err());
        assert!(regression_lrt_null(3, 3).is_err());
    }

    #[test]
    fn regression_reduces_when_variance_estimate_matches() {
        // residuals orthogonal to the intercept with RSS = n sigma0^2
        let x = DMatrix::from_column_slice(4, 1, &[1.0; 4]);
        let y = [1.0 + 2.0, 1.0 - 2.0, 1.0 + 2.0, 1.0 - 2.0];
        let v = regression_lrt_statistic(&y, &x, &[0.0], 4.0).unwrap();
        // RSS = 16 = 4 * 4, RSS0 - RSS = 4
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_null_structure() {
        let c = regression_lrt_null(110, 10).unwrap();
        assert_eq!(c.terms().len(), 2);
        assert_eq!(c.terms()[0].nu(), 10.0);
        assert_eq!(c.terms()[1].nu(), 100.0);
        assert!((combo_cf(&c, 0.0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_matches_variance_statistic() {
        for &(s2, s0, nu) in &[(1.7, 0.4, 3u32), (0.05, 2.0, 12), (1.0, 1.0, 1)] {
            let m = VarCompModel::new(vec![1.0], vec![nu], vec![nu as f64 * s2]).unwrap();
            let a = canonical_lrt_statistic(&m, &[s0]).unwrap();
            let b = variance_lrt_statistic(s2, s0, nu as f64).unwrap();
            assert!((a - b).abs() < 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn canonical_zero_at_reml() {
        let m = varcomp();
        assert!(canonical_lrt_statistic(&m, &m.reml_estimates()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn varcomp_statistics() {
        let m = varcomp();
        for (s1, want) in [(0.1, 7.3095), (0.0, 18.7350), (1.0, 10.6475)] {
            let got = canonical_lrt_statistic(&m, &hypothesis(&m, s1)).unwrap();
            assert!((got - want).abs() < 0.05, "sigma1^2 {s1}: {got} vs {want}");
        }
    }

    #[test]
    fn varcomp_decisions() {
        let m = varcomp();
        let q = QuadratureSettings::default();
        for s1 in [0.1, 0.0, 1.0] {
            let th = hypothesis(&m, s1);
            let exact = canonical_lrt_test(&m, &th, 0.05, &q).unwrap();
            assert!((exact.null_quantile - 22.2689).abs() < 2e-3);
            assert!(!exact.reject());
            assert!(exact.p_value > 0.05);
            let asym = asymptotic_test(exact.statistic, m.len() as f64, 0.05).unwrap();
            assert!((asym.null_quantile - 18.3070).abs() < 1e-3);
            assert_eq!(asym.reject(), s1 == 0.0);
        }
    }

    #[test]
    fn canonical_distribution_alternatives() {
        let m = varcomp();
        let th = hypothesis(&m, 0.1);
        let null = canonical_lrt_distribution(&m, &th, None).unwrap();
        let same = canonical_lrt_distribution(&m, &th, Some(&th)).unwrap();
        for t in [0.1, 0.7, 3.0] {
            assert!((combo_cf(&null, t) - combo_cf(&same, t)).norm() < 1e-14);
        }
        assert!(canonical_lrt_distribution(&m, &th[..3], None).is_err());
        let mut bad = th.clone();
        bad[2] = 0.0;
        assert!(canonical_lrt_statistic(&m, &bad).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(VarCompModel::new(vec![1.0, 2.0], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(VarCompModel::new(vec![2.0, 1.0], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(VarCompModel::new(vec![2.0, 1.0], vec![1, 1], vec![1.0]).is_err());
        assert!(VarCompModel::new(vec![2.0], vec![1], vec![-1.0]).is_err());
        let m = VarCompModel::new(vec![2.0, 0.0], vec![1, 1], vec![0.0, 1.0]).unwrap();
        assert!(canonical_lrt_statistic(&m, &[1.0, 1.0]).is_err());
        assert_eq!(varcomp().total_dof(), 109);
    }
}
