//! Brute-force checks: seeded sampling, empirical summaries,
//! Kolmogorov-Smirnov distances, coverage experiments and quadrature.
//!
//! Every draw is reproducible from `(seed, stream)`; a combination uses
//! stream `j` for its term `j`, a single variable uses stream 0.

mod quadrature;
mod sampling;

pub use quadrature::{integrate, integrate_from};
pub use sampling::{stream_rng, Chi2Sampler, CombinationSampler, GammaSampler, LwSampler};

use crate::convolve::{combo_cdf_many, combo_pdf_many, LinearCombination, QuadratureSettings, Term};
use crate::error::{domain, Error, Result};
use crate::inference::ConfidenceInterval;
use crate::lwdist::LWChiSquared;

/// What to sample.
#[derive(Debug, Clone)]
pub enum SampleTarget {
    Chi2(f64),
    Lw(LWChiSquared),
    Combination(LinearCombination),
}

#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub target: SampleTarget,
    pub count: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(target: SampleTarget, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("sample count must be at least 1".into()));
        }
        Ok(Self { target, count, seed })
    }
}

/// Sorted draws with their moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSummary {
    pub sorted_samples: Vec<f64>,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single draw.
    pub variance: f64,
    pub ks_vs: Option<f64>,
}

impl EmpiricalSummary {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("no samples".into()));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return domain("samples contain NaN");
        }
        samples.sort_unstable_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self { sorted_samples: samples, mean, variance, ks_vs: None })
    }

    pub fn len(&self) -> usize {
        self.sorted_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_samples.is_empty()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.len() as f64).sqrt()
    }

    /// Linear interpolation between order statistics (type 7).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("p must lie in [0, 1], got {p}"));
        }
        let xs = &self.sorted_samples;
        let h = p * (xs.len() - 1) as f64;
        let i = h.floor() as usize;
        if i + 1 >= xs.len() {
            return Ok(xs[xs.len() - 1]);
        }
        Ok(xs[i] + (h - i as f64) * (xs[i + 1] - xs[i]))
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted_samples.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    pub fn with_ks<F: FnMut(f64) -> f64>(mut self, cdf: F) -> Self {
        self.ks_vs = Some(ks_statistic(&self, cdf));
        self
    }
}

pub fn sample(spec: &SampleSpec) -> Result<EmpiricalSummary> {
    match &spec.target {
        SampleTarget::Chi2(nu) => sample_chi2(*nu, spec.count, spec.seed),
        SampleTarget::Lw(d) => sample_lw(d, spec.count, spec.seed),
        SampleTarget::Combination(c) => sample_combination(c, spec.count, spec.seed),
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    Ok(())
}

pub fn sample_chi2(nu: f64, count: usize, seed: u64) -> Result<EmpiricalSummary> {
    check_count(count)?;
    let s = Chi2Sampler::new(nu)?;
    let mut rng = stream_rng(seed, 0);
    EmpiricalSummary::from_samples((0..count).map(|_| s.sample(&mut rng)).collect())
}

pub fn sample_lw(d: &LWChiSquared, count: usize, seed: u64) -> Result<EmpiricalSummary> {
    check_count(count)?;
    let s = LwSampler::new(*d)?;
    let mut rng = stream_rng(seed, 0);
    EmpiricalSummary::from_samples((0..count).map(|_| s.sample(&mut rng)).collect())
}

pub fn sample_combination(c: &LinearCombination, count: usize, seed: u64) -> Result<EmpiricalSummary> {
    check_count(count)?;
    EmpiricalSummary::from_samples(CombinationSampler::new(c)?.draw(count, seed))
}

/// `sup |F_n - F|`, evaluated exactly at the order statistics.
pub fn ks_statistic<F: FnMut(f64) -> f64>(samples: &EmpiricalSummary, mut cdf: F) -> f64 {
    let n = samples.len() as f64;
    samples.sorted_samples.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).max(f - i as f64 / n))
    })
}

/// Piecewise cubic Hermite interpolant of a combination's CDF, built from
/// CDF and PDF values at the nodes. Used where evaluating the inversion at
/// every sample would be too slow.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    x: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(c: &LinearCombination, nodes: &[f64], q: &QuadratureSettings) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("need at least two increasing nodes".into()));
        }
        Ok(Self { x: nodes.to_vec(), f: combo_cdf_many(c, nodes, q)?, d: combo_pdf_many(c, nodes, q)? })
    }

    /// Nodes at `count` evenly spaced empirical quantiles, spanning the
    /// whole sample.
    pub fn over_samples(
        c: &LinearCombination,
        samples: &EmpiricalSummary,
        count: usize,
        q: &QuadratureSettings,
    ) -> Result<Self> {
        let count = count.max(2);
        let mut nodes: Vec<f64> = (0..count)
            .map(|i| samples.quantile(i as f64 / (count - 1) as f64))
            .collect::<Result<_>>()?;
        nodes.dedup();
        if nodes.len() < 2 {
            let x = nodes[0];
            nodes = vec![x - 1.0, x + 1.0];
        }
        Self::new(c, &nodes, q)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.x.len();
        if y <= self.x[0] {
            return self.f[0];
        }
        if y >= self.x[n - 1] {
            return self.f[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= y) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (y - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.f[i]
            + (t3 - 2.0 * t2 + t) * h * self.d[i]
            + (3.0 * t2 - 2.0 * t3) * self.f[i + 1]
            + (t3 - t2) * h * self.d[i + 1];
        v.clamp(0.0, 1.0)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Hit count of a Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.hits, self.trials, z)
    }
}

/// How often `interval(S^2)` covers the true `sigma^2 = 1` when
/// `nu S^2 ~ chi2_nu`.
pub fn variance_ci_coverage<F>(nu: f64, replications: u64, seed: u64, mut interval: F) -> Result<Proportion>
where
    F: FnMut(f64) -> Result<ConfidenceInterval>,
{
    let s = Chi2Sampler::new(nu)?;
    let mut rng = stream_rng(seed, 0);
    let mut hits = 0;
    for _ in 0..replications {
        let s2 = s.sample(&mut rng) / nu;
        if interval(s2)?.contains(1.0) {
            hits += 1;
        }
    }
    Ok(Proportion { hits, trials: replications })
}

/// How often a draw of `c` exceeds `critical`.
pub fn exceedance_rate(c: &LinearCombination, critical: f64, replications: u64, seed: u64) -> Result<Proportion> {
    let draws = CombinationSampler::new(c)?.draw(replications as usize, seed);
    let hits = draws.iter().filter(|&&v| v > critical).count() as u64;
    Ok(Proportion { hits, trials: replications })
}

/// Total mass, mean and variance of a density on `[lower, inf)` by
/// quadrature. The density may have an inverse square-root singularity at
/// `lower`.
pub fn density_moments<F: FnMut(f64) -> f64>(mut pdf: F, lower: f64, rel_tol: f64) -> Result<(f64, f64, f64)> {
    let (mass, _) = integrate_from(&mut pdf, lower, 0.0, rel_tol)?;
    let (m1, _) = integrate_from(|y| (y - lower) * pdf(y), lower, 0.0, rel_tol)?;
    let mean = lower + m1 / mass;
    let (m2, _) = integrate_from(|y| (y - mean) * (y - mean) * pdf(y), lower, 0.0, rel_tol)?;
    Ok((mass, mean, m2 / mass))
}

/// Sample correlation of two equally long series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// The single-term combination `1 * d`, convenient for oracle comparisons.
pub fn as_combination(d: LWChiSquared) -> Result<LinearCombination> {
    Ok(LinearCombination::single(Term::lw_chi2(d, 1.0)?))
}
