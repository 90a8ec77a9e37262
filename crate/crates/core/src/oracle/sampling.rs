use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::convolve::{LinearCombination, TermKind};
use crate::error::{domain, Result};
use crate::lwdist::{transform, LWChiSquared};

/// Generator for sub-stream `stream` of `seed`.
///
/// ChaCha8 keyed from `seed`, with the stream index selecting one of its
/// 2^64 independent counter streams.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Marsaglia-Tsang gamma sampler with unit scale.
///
/// Shapes below one are boosted: `G(a) = G(a + 1) U^{1/a}`, carried out
/// in logs so tiny shapes do not underflow to zero.
#[derive(Debug, Clone, Copy)]
pub struct GammaSampler {
    shape: f64,
    d: f64,
    c: f64,
    boost: bool,
}

impl GammaSampler {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return domain(format!("gamma shape must be positive, got {shape}"));
        }
        let boost = shape < 1.0;
        let d = if boost { shape + 1.0 } else { shape } - 1.0 / 3.0;
        Ok(Self { shape, d, c: 1.0 / (9.0 * d).sqrt(), boost })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    fn core<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let (x, v) = loop {
                let x: f64 = rng.sample(StandardNormal);
                let v = 1.0 + self.c * x;
                if v > 0.0 {
                    break (x, v * v * v);
                }
            };
            let u: f64 = rng.gen();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return self.d * v;
            }
            if u.ln() < 0.5 * x2 + self.d * (1.0 - v + v.ln()) {
                return self.d * v;
            }
        }
    }

    /// A draw together with its logarithm.
    pub fn sample_with_log<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let g = self.core(rng);
        if !self.boost {
            return (g, g.ln());
        }
        // open interval keeps ln u finite
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let ln = g.ln() + u.ln() / self.shape;
        (ln.exp(), ln)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_with_log(rng).0
    }
}

/// Chi-squared draws as `2 Gamma(nu / 2)`.
#[derive(Debug, Clone, Copy)]
pub struct Chi2Sampler {
    gamma: GammaSampler,
}

impl Chi2Sampler {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return domain(format!("nu must be positive, got {nu}"));
        }
        Ok(Self { gamma: GammaSampler::new(0.5 * nu)? })
    }

    pub fn sample_with_log<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let (g, ln) = self.gamma.sample_with_log(rng);
        (2.0 * g, ln + std::f64::consts::LN_2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        2.0 * self.gamma.sample(rng)
    }
}

/// Push-forward sampler for LW x chi2_nu.
#[derive(Debug, Clone, Copy)]
pub struct LwSampler {
    dist: LWChiSquared,
    chi2: Chi2Sampler,
}

impl LwSampler {
    pub fn new(dist: LWChiSquared) -> Result<Self> {
        Ok(Self { chi2: Chi2Sampler::new(dist.nu())?, dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (x, ln_x) = self.chi2.sample_with_log(rng);
        let th = self.dist.theta();
        if x > 0.0 && x.is_finite() {
            // x > 0 is always inside the domain
            transform(th, x).unwrap_or(f64::INFINITY)
        } else {
            th.theta1() - th.theta2() * ln_x + th.theta3() * x
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TermSampler {
    Lw(LwSampler),
    Chi2(Chi2Sampler),
}

impl TermSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TermSampler::Lw(s) => s.sample(rng),
            TermSampler::Chi2(s) => s.sample(rng),
        }
    }
}

/// Sampler for a linear combination; term `j` draws from sub-stream `j`.
#[derive(Debug, Clone)]
pub struct CombinationSampler {
    terms: Vec<(TermSampler, f64)>,
}

impl CombinationSampler {
    pub fn new(c: &LinearCombination) -> Result<Self> {
        let terms = c
            .terms()
            .iter()
            .map(|t| {
                let s = match t.kind() {
                    TermKind::LwChi2(d) => TermSampler::Lw(LwSampler::new(*d)?),
                    TermKind::Chi2(nu) => TermSampler::Chi2(Chi2Sampler::new(*nu)?),
                };
                Ok((s, t.coefficient()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    /// `count` draws, reproducible from `seed`.
    pub fn draw(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut out = vec![0.0; count];
        for (j, (s, lambda)) in self.terms.iter().enumerate() {
            let mut rng = stream_rng(seed, j as u64);
            if self.terms.len() == 1 && *lambda == 1.0 {
                out.iter_mut().for_each(|v| *v = s.sample(&mut rng));
            } else {
                out.iter_mut().for_each(|v| *v += lambda * s.sample(&mut rng));
            }
        }
        out
    }
}
