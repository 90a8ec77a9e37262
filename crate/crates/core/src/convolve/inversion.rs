//! Gil-Pelaez inversion of a product of term CFs.
//!
//! The integrand is written as `e^{-it(y - w0)} H(t)` where `w0` is the
//! combination's singular point and `H` the centered CF, whose phase tends to
//! a constant for large `t`. The integral is split into
//!
//! * a body `[0, T]` covered by 6-point Gauss-Legendre panels whose width is
//!   bounded by a quarter of the local oscillation wavelength and by the
//!   scale on which `|H|` varies, and
//! * either nothing, when `|H|` falls below the truncation floor at an
//!   affordable `T`, or an oscillatory tail summed over half-periods
//!   `pi / |y - w0|` and extrapolated with Wynn's epsilon algorithm.
//!
//! Each LW term's CF decays only like `|t|^{-1/2}`, so the tail is the normal
//! case for combinations with few terms.

use super::{combo_cumulants, LinearCombination, QuadratureSettings};
use crate::error::{domain, Error, Result};
use crate::specfun::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const GL_X: [f64; 3] = [0.238_619_186_083_196_9, 0.661_209_386_466_264_5, 0.932_469_514_203_152_1];
const GL_W: [f64; 3] = [0.467_913_934_572_691, 0.360_761_573_048_138_6, 0.171_324_492_379_170_4];

const MAX_TAIL_INTERVALS: usize = 400;
const MIN_WYNN_TERMS: usize = 6;
// Beyond this cutoff `1/|y - w0|` is treated as infinite.
const MAX_OSCILLATION_START: f64 = 1e20;
const MAX_ENVELOPE_T: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    Cdf,
    Pdf,
}

struct Prepared {
    t: Vec<f64>,
    w: Vec<f64>,
    h: Vec<Complex64>,
    /// `true` when the body alone reaches the truncation floor.
    complete: bool,
    used: usize,
}

pub(crate) struct Inversion<'a> {
    combo: &'a LinearCombination,
    q: QuadratureSettings,
    omega0: f64,
    kappa1: f64,
    sigma: f64,
    decay: f64,
    t_asym: f64,
    t_base: f64,
    lower: Option<f64>,
    upper: Option<f64>,
}

impl<'a> Inversion<'a> {
    pub(crate) fn new(combo: &'a LinearCombination, q: &QuadratureSettings) -> Result<Self> {
        q.validate()?;
        let k = combo_cumulants(combo, 2)?;
        let sigma = k.variance.sqrt();
        let t_asym = combo.asymptotic_scale();
        Ok(Self {
            combo,
            q: *q,
            omega0: combo.singular_point(),
            kappa1: k.mean,
            sigma,
            decay: combo.decay_order(),
            t_asym,
            t_base: t_asym.max(5.0 / sigma),
            lower: combo.support_lower(),
            upper: combo.support_upper(),
        })
    }

    fn h(&self, t: f64) -> Complex64 {
        self.combo.ln_cf_centered(t).exp()
    }

    /// Panel width at `t` for carrier frequency `u = |y - w0|`.
    fn width(&self, t: f64, u: f64) -> f64 {
        // the phase of H drifts from kappa1 t towards w0 t; past t_asym the
        // residual drift decays like t^-2
        let ratio = self.t_asym / t.max(self.t_asym);
        let omega = u + (self.kappa1 - self.omega0).abs() * ratio * ratio;
        let quarter = if omega > 0.0 { FRAC_PI_2 / omega } else { f64::INFINITY };
        quarter.min((0.25 / self.sigma).max(0.1 * t))
    }

    fn panel_count(&self, a: f64, b: f64, u: f64, cap: usize) -> usize {
        let mut t = a;
        let mut n = 0;
        while t < b && n <= cap {
            t += self.width(t, u);
            n += 1;
        }
        n
    }

    fn for_each_node(
        &self,
        a: f64,
        b: f64,
        u: f64,
        used: &mut usize,
        mut f: impl FnMut(f64, f64),
    ) -> Result<()> {
        let mut lo = a;
        while lo < b {
            let hi = (lo + self.width(lo, u)).min(b);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for (x, w) in GL_X.iter().zip(GL_W.iter()) {
                f(mid - half * x, half * w);
                f(mid + half * x, half * w);
            }
            *used += 6;
            if *used > self.q.max_nodes {
                return Err(Error::Convergence(format!(
                    "CF inversion exceeded {} nodes",
                    self.q.max_nodes
                )));
            }
            lo = hi;
        }
        Ok(())
    }

    /// Truncation point where `|cf|` is below the floor and the remaining
    /// tail is negligible, if it can be reached within the node budget.
    fn envelope_cutoff(&self, u: f64) -> Option<f64> {
        if self.decay <= 1.0 {
            return None;
        }
        let floor = self.q.truncation_cf_floor;
        let mut t = 1.0 / self.sigma;
        loop {
            let m = self.combo.cf_modulus(t);
            let tail = m * t / (self.decay - 1.0);
            if m <= floor && tail <= 0.1 * self.q.abs_tol {
                break;
            }
            t *= 2.0;
            if t > MAX_ENVELOPE_T {
                return None;
            }
        }
        let cap = self.q.max_nodes / 12;
        (self.panel_count(0.0, t, u, cap) <= cap).then_some(t)
    }

    fn prepare(&self, u_max: f64) -> Result<Prepared> {
        let (end, complete) = match self.envelope_cutoff(u_max) {
            Some(t) => (t, true),
            None => (self.t_base, false),
        };
        let mut used = 0;
        let (mut ts, mut ws) = (Vec::new(), Vec::new());
        self.for_each_node(0.0, end, u_max, &mut used, |t, w| {
            ts.push(t);
            ws.push(w);
        })?;
        let h = ts.iter().map(|&t| self.h(t)).collect();
        Ok(Prepared { t: ts, w: ws, h, complete, used })
    }

    fn integrand(&self, target: Target, t: f64, h: Complex64, y: f64) -> f64 {
        let g = h * Complex64::from_polar(1.0, -t * (y - self.omega0));
        match target {
            Target::Cdf if t == 0.0 => self.kappa1 - y,
            Target::Cdf => g.im / t,
            Target::Pdf => g.re,
        }
    }

    fn integrate(&self, a: f64, b: f64, u: f64, y: f64, target: Target, used: &mut usize) -> Result<f64> {
        let mut acc = 0.0;
        self.for_each_node(a, b, u, used, |t, w| {
            acc += w * self.integrand(target, t, self.h(t), y);
        })?;
        Ok(acc)
    }

    fn tail(&self, y: f64, target: Target, mut used: usize) -> Result<f64> {
        let u = (y - self.omega0).abs();
        if target == Target::Pdf && self.decay <= 1.0 && u == 0.0 {
            return Err(Error::Convergence(format!(
                "density is unbounded at the singular point y = {y}"
            )));
        }
        let tol = 0.1 * self.q.abs_tol * PI;
        let oscillating = u > 0.0 && 8.0 * PI / u < MAX_OSCILLATION_START;
        let (start, step) = if oscillating {
            let start = self.t_base.max(8.0 * PI / u);
            (start, PI / u)
        } else {
            (self.t_base, 0.0)
        };
        let mut acc = self.integrate(self.t_base, start, u, y, target, &mut used)?;
        let mut sums = vec![acc];
        let mut a = start;
        let mut hits = 0;
        for _ in 0..MAX_TAIL_INTERVALS {
            let b = if oscillating { a + step } else { 2.0 * a };
            acc += self.integrate(a, b, u, y, target, &mut used)?;
            sums.push(acc);
            a = b;
            if sums.len() >= MIN_WYNN_TERMS {
                let (est, err) = wynn_epsilon(&sums);
                if err <= tol {
                    hits += 1;
                    if hits >= 2 {
                        return Ok(est);
                    }
                } else {
                    hits = 0;
                }
            }
        }
        Err(Error::Convergence(format!("CF inversion tail did not converge at y = {y}")))
    }

    fn eval_prepared(&self, prep: &Prepared, y: f64, target: Target) -> Result<f64> {
        let mut raw = 0.0;
        for i in 0..prep.t.len() {
            raw += prep.w[i] * self.integrand(target, prep.t[i], prep.h[i], y);
        }
        if !prep.complete {
            raw += self.tail(y, target, prep.used)?;
        }
        Ok(match target {
            Target::Cdf => (0.5 - raw / PI).clamp(0.0, 1.0),
            Target::Pdf => (raw / PI).max(0.0),
        })
    }

    /// Value fixed by the support, if `y` lies outside it.
    fn trivial(&self, y: f64, target: Target) -> Option<f64> {
        match target {
            Target::Cdf => {
                if self.lower.is_some_and(|l| y <= l) {
                    Some(0.0)
                } else if self.upper.is_some_and(|h| y >= h) {
                    Some(1.0)
                } else {
                    None
                }
            }
            Target::Pdf => {
                if self.lower.is_some_and(|l| y < l) || self.upper.is_some_and(|h| y > h) {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }

    pub(crate) fn evaluate(&self, ys: &[f64], target: Target) -> Result<Vec<f64>> {
        if let Some(bad) = ys.iter().find(|y| !y.is_finite()) {
            return domain(format!("evaluation point must be finite, got {bad}"));
        }
        let u_max = ys
            .iter()
            .filter(|&&y| self.trivial(y, target).is_none())
            .map(|y| (y - self.omega0).abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if u_max == f64::NEG_INFINITY {
            return Ok(ys.iter().map(|&y| self.trivial(y, target).unwrap()).collect());
        }
        let prep = self.prepare(u_max)?;
        ys.iter()
            .map(|&y| match self.trivial(y, target) {
                Some(v) => Ok(v),
                None => self.eval_prepared(&prep, y, target),
            })
            .collect()
    }

    pub(crate) fn quantile(&self, p: f64) -> Result<f64> {
        let mut span = 20.0 * self.sigma;
        for _ in 0..6 {
            let mut lo = self.kappa1 - span;
            let mut hi = self.kappa1 + span;
            if let Some(l) = self.lower {
                lo = lo.max(l);
            }
            if let Some(h) = self.upper {
                hi = hi.min(h);
            }
            let u_max = (lo - self.omega0).abs().max((hi - self.omega0).abs());
            let prep = self.prepare(u_max)?;
            let cdf = |y: f64| -> Result<f64> {
                match self.trivial(y, Target::Cdf) {
                    Some(v) => Ok(v),
                    None => self.eval_prepared(&prep, y, Target::Cdf),
                }
            };
            let f_lo = cdf(lo)? - p;
            let f_hi = cdf(hi)? - p;
            if f_lo <= 0.0 && f_hi >= 0.0 {
                return brent(cdf, p, lo, hi, f_lo, f_hi, self.q.abs_tol);
            }
            span *= 2.0;
        }
        Err(Error::Convergence(format!("could not bracket the {p}-quantile")))
    }
}

/// Root of `f(x) - p` on `[a, b]` (Brent's method), stopping when the residual
/// is within `ftol` or the bracket is at rounding level.
fn brent(
    f: impl Fn(f64) -> Result<f64>,
    p: f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
) -> Result<f64> {
    if fa.abs() <= ftol {
        return Ok(a);
    }
    if fb.abs() <= ftol {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 2.0 * f64::EPSILON * b.abs() + 1e-14;
        let m = 0.5 * (c - b);
        if fb.abs() <= ftol || m.abs() <= xtol {
            return Ok(b);
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut qq);
            if a == c {
                pp = 2.0 * m * s;
                qq = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                pp = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                qq = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if pp > 0.0 {
                qq = -qq;
            } else {
                pp = -pp;
            }
            if 2.0 * pp < (3.0 * m * qq - (xtol * qq).abs()).min((e * qq).abs()) {
                e = d;
                d = pp / qq;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = f(b)? - p;
    }
    Err(Error::Convergence("quantile root-finding did not converge".into()))
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
///
/// Returns the estimate from the highest even column available together
/// with the difference to its predecessor in that column as an error
/// estimate.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    let mut best = sums[n - 1];
    let mut best_err = if n > 1 { (sums[n - 1] - sums[n - 2]).abs() } else { f64::INFINITY };
    let mut prev = vec![0.0; n + 1];
    let mut cur = sums.to_vec();
    let mut k = 0;
    while cur.len() > 1 {
        let next: Vec<f64> =
            (0..cur.len() - 1).map(|i| prev[i + 1] + 1.0 / (cur[i + 1] - cur[i])).collect();
        // a zero difference means the column has stalled
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 && cur.len() >= 2 {
            let m = cur.len();
            let err = (cur[m - 1] - cur[m - 2]).abs();
            if err < best_err {
                best = cur[m - 1];
                best_err = err;
            }
        }
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=14)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (est, err) = wynn_epsilon(&sums);
        assert!((est - 2f64.ln()).abs() < 1e-9, "{est}");
        assert!(err < 1e-7);
    }

    #[test]
    fn wynn_handles_geometric_and_constant() {
        let sums: Vec<f64> = (0..8).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        let (est, _) = wynn_epsilon(&sums);
        assert!((est - 1.0).abs() < 1e-14);
        let (est, err) = wynn_epsilon(&[3.0, 3.0, 3.0]);
        assert_eq!(est, 3.0);
        assert_eq!(err, 0.0);
    }
}
