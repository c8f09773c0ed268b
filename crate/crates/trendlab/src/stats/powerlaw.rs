use rand::Rng;
use serde::Serialize;

use super::ks::{ks_distance, sort_floats};
use super::StatsError;
use crate::rng::{streams, substream};

pub const MIN_SAMPLES: usize = 50;
/// Smallest tail a scanned cutoff may leave.
pub const MIN_TAIL: usize = 10;
/// Upper bound on cutoffs tried by a scan.
const MAX_CANDIDATES: usize = 200;
/// Integer scans try the smallest distinct values only.
const MAX_INTEGER_CANDIDATES: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XMinMode {
    Fixed(f64),
    /// Cutoff minimizing the KS distance over observed values.
    Scan,
}

impl Default for XMinMode {
    fn default() -> Self {
        XMinMode::Fixed(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: f64,
    pub n: usize,
    pub n_tail: usize,
    pub ks_stat: f64,
    pub p_value: f64,
    pub accepted: bool,
}

/// Continuous maximum-likelihood exponent `1 + n / Σ ln(x / x_min)` over the
/// samples at or above `x_min`.
pub fn alpha_mle(samples: &[f64], x_min: f64) -> Result<f64, StatsError> {
    let (n, s) = samples
        .iter()
        .filter(|&&x| x >= x_min)
        .fold((0usize, 0.0), |(n, s), &x| (n + 1, s + (x / x_min).ln()));
    if n == 0 || !(s > 0.0) {
        return Err(StatsError::AllBelowCutoff { x_min });
    }
    Ok(1.0 + n as f64 / s)
}

/// How samples relate to the continuous law being fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Support {
    Continuous,
    /// Integer data read as rounded draws from a law starting at `x_min - 1/2`.
    Integer,
}

impl Support {
    fn of(samples: &[f64]) -> Support {
        if samples.iter().all(|x| x.fract() == 0.0) {
            Support::Integer
        } else {
            Support::Continuous
        }
    }

    /// Lower end of the continuous law for a cutoff.
    fn origin(self, x_min: f64) -> f64 {
        match self {
            Support::Continuous => x_min,
            Support::Integer => x_min - 0.5,
        }
    }

    /// `P(X <= x)` under the fitted law.
    fn cdf(self, x: f64, x_min: f64, alpha: f64) -> f64 {
        let top = match self {
            Support::Continuous => x,
            Support::Integer => x + 0.5,
        };
        1.0 - (top / self.origin(x_min)).powf(1.0 - alpha)
    }

    /// KS distance of an ascending tail from the fitted law. On integer
    /// support both distributions are step functions, so they are compared
    /// on either side of every observed value.
    fn ks(self, tail: &[f64], x_min: f64, alpha: f64) -> f64 {
        match self {
            Support::Continuous => ks_distance(tail, |x| self.cdf(x, x_min, alpha)),
            Support::Integer => Self::integer_ks(&group(tail), x_min, alpha),
        }
    }

    /// KS distance between step functions, checked just below and at every
    /// observed integer.
    fn integer_ks(groups: &[Group], x_min: f64, alpha: f64) -> f64 {
        let n: f64 = groups.iter().map(|g| g.count).sum();
        let mut d: f64 = 0.0;
        let mut seen = 0.0;
        for &Group { value: x, count: c, .. } in groups {
            let below = if x > x_min { Support::Integer.cdf(x - 1.0, x_min, alpha) } else { 0.0 };
            d = d.max((seen / n - below).abs());
            seen += c;
            d = d.max((seen / n - Support::Integer.cdf(x, x_min, alpha)).abs());
        }
        d
    }

    fn draw(self, u: f64, x_min: f64, alpha: f64) -> f64 {
        let y = self.origin(x_min) * (1.0 - u).powf(-1.0 / (alpha - 1.0));
        match self {
            Support::Continuous => y,
            Support::Integer => (y + 0.5).floor(),
        }
    }
}

/// Runs of equal values in an ascending integer sample, with the logs the
/// rounded-law likelihood needs.
#[derive(Debug, Clone, Copy)]
struct Group {
    value: f64,
    count: f64,
    /// `ln(value - 1/2)` and `ln(value + 1/2)`
    ln_lo: f64,
    ln_hi: f64,
}

fn group(sorted: &[f64]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for &x in sorted {
        match groups.last_mut() {
            Some(g) if g.value == x => g.count += 1.0,
            _ => groups.push(Group {
                value: x,
                count: 1.0,
                ln_lo: (x - 0.5).ln(),
                ln_hi: (x + 0.5).ln(),
            }),
        }
    }
    groups
}

/// Exponent maximizing the likelihood of rounded draws for the grouped
/// integer tail whose first group is the cutoff. `None` when the tail holds a
/// single value. Safeguarded Newton on the score, which falls from +inf
/// near 1 to a negative limit, so the root is unique.
fn integer_alpha(groups: &[Group]) -> Option<f64> {
    if groups.len() < 2 {
        return None;
    }
    let ln_o = groups[0].ln_lo;
    // score and its derivative; per group, with u = (hi/lo)^(1-a), the term is
    // (ln(hi/o) u - ln(lo/o)) / (1 - u)
    let score = |a: f64| -> (f64, f64) {
        let (mut s, mut ds) = (0.0, 0.0);
        for g in groups {
            let d = g.ln_hi - g.ln_lo;
            let u = ((1.0 - a) * d).exp();
            let w = 1.0 - u;
            s += g.count * ((g.ln_hi - ln_o) * u - (g.ln_lo - ln_o)) / w;
            ds -= g.count * d * d * u / (w * w);
        }
        (s, ds)
    };
    let n: f64 = groups.iter().map(|g| g.count).sum();
    let approx: f64 = groups.iter().map(|g| g.count * (g.value.ln() - ln_o)).sum();
    let (mut lo, mut hi) = (1.0, 2.0);
    while score(hi).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut a = (1.0 + n / approx).clamp(lo, hi);
    if !(a > lo && a < hi) {
        a = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let (s, ds) = score(a);
        if s.abs() < 1e-12 * n || hi - lo < 1e-10 * a {
            break;
        }
        if s > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let next = a - s / ds;
        a = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    Some(a)
}

#[derive(Debug, Clone, Copy)]
struct TailFit {
    alpha: f64,
    x_min: f64,
    n_tail: usize,
    ks: f64,
}

/// Fit on ascending samples.
fn fit_sorted(sorted: &[f64], mode: XMinMode, support: Support) -> Result<TailFit, StatsError> {
    match mode {
        XMinMode::Fixed(x_min) => {
            let lo = sorted.partition_point(|&x| x < x_min);
            let tail = &sorted[lo..];
            let alpha = match support {
                Support::Continuous => alpha_mle(tail, x_min)?,
                Support::Integer => integer_alpha(&group(tail)).ok_or(StatsError::AllBelowCutoff { x_min })?,
            };
            Ok(TailFit {
                alpha,
                x_min,
                n_tail: tail.len(),
                ks: support.ks(tail, x_min, alpha),
            })
        }
        XMinMode::Scan if support == Support::Integer => {
            let groups = group(sorted);
            let mut tail_len = vec![0.0; groups.len() + 1];
            for g in (0..groups.len()).rev() {
                tail_len[g] = tail_len[g + 1] + groups[g].count;
            }
            let mut best: Option<TailFit> = None;
            for g in (0..groups.len()).filter(|&g| tail_len[g] >= MIN_TAIL as f64).take(MAX_INTEGER_CANDIDATES) {
                let x_min = groups[g].value;
                let Some(alpha) = integer_alpha(&groups[g..]) else {
                    continue;
                };
                let ks = Support::integer_ks(&groups[g..], x_min, alpha);
                if best.is_none_or(|b| ks < b.ks) {
                    best = Some(TailFit {
                        alpha,
                        x_min,
                        n_tail: tail_len[g] as usize,
                        ks,
                    });
                }
            }
            best.ok_or(StatsError::AllBelowCutoff {
                x_min: sorted.first().copied().unwrap_or(0.0),
            })
        }
        XMinMode::Scan => {
            let n = sorted.len();
            // suffix[i] = Σ_{k >= i} ln x_k
            let mut suffix = vec![0.0; n + 1];
            for i in (0..n).rev() {
                suffix[i] = suffix[i + 1] + sorted[i].ln();
            }
            let mut starts: Vec<usize> = Vec::new();
            for i in 0..n {
                if (i == 0 || sorted[i] != sorted[i - 1]) && n - i >= MIN_TAIL {
                    starts.push(i);
                }
            }
            if starts.len() > MAX_CANDIDATES {
                let step = starts.len() as f64 / MAX_CANDIDATES as f64;
                starts = (0..MAX_CANDIDATES).map(|k| starts[(k as f64 * step) as usize]).collect();
            }
            let mut best: Option<TailFit> = None;
            for i in starts {
                let x_min = sorted[i];
                let n_tail = n - i;
                let s = suffix[i] - n_tail as f64 * x_min.ln();
                if !(s > 0.0) {
                    continue;
                }
                let alpha = 1.0 + n_tail as f64 / s;
                let ks = ks_distance(&sorted[i..], |x| support.cdf(x, x_min, alpha));
                if best.is_none_or(|b| ks < b.ks) {
                    best = Some(TailFit { alpha, x_min, n_tail, ks });
                }
            }
            best.ok_or(StatsError::AllBelowCutoff {
                x_min: sorted.first().copied().unwrap_or(0.0),
            })
        }
    }
}

/// Fits a power-law tail and scores it with a semi-parametric bootstrap:
/// replicates keep the empirical body below the cutoff and redraw the tail
/// from the fitted law, then go through the same fit. All-integer input is
/// treated as rounded draws from a continuous law starting half a unit below
/// the cutoff; its exponent maximizes that model's exact likelihood, since
/// the closed form is badly biased at small cutoffs.
pub fn fit_powerlaw(
    samples: &[f64],
    mode: XMinMode,
    alpha_level: f64,
    n_bootstrap: usize,
    seed: u64,
) -> Result<PowerLawFit, StatsError> {
    let n = samples.len();
    if let Some(&bad) = samples.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(StatsError::NonPositive(bad));
    }
    let usable = match mode {
        XMinMode::Fixed(x_min) => samples.iter().filter(|&&x| x >= x_min).count(),
        XMinMode::Scan => samples.iter().filter(|&&x| x >= 1.0).count(),
    };
    if usable < MIN_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: usable,
        });
    }
    let support = Support::of(samples);
    let mut sorted = samples.to_vec();
    sort_floats(&mut sorted);
    let fit = fit_sorted(&sorted, mode, support)?;

    let body_len = sorted.partition_point(|&x| x < fit.x_min);
    let body = &sorted[..body_len];
    let p_tail = fit.n_tail as f64 / n as f64;
    let mut rng = substream(seed, streams::BOOTSTRAP);
    let mut exceed = 0usize;
    let mut buf = vec![0.0; n];
    for _ in 0..n_bootstrap {
        for x in buf.iter_mut() {
            *x = if body.is_empty() || rng.random_bool(p_tail) {
                support.draw(rng.random(), fit.x_min, fit.alpha)
            } else {
                body[rng.random_range(0..body.len())]
            };
        }
        sort_floats(&mut buf);
        // replicates the fit cannot handle never count as more extreme
        if fit_sorted(&buf, mode, support).is_ok_and(|b| b.ks > fit.ks) {
            exceed += 1;
        }
    }
    let p_value = if n_bootstrap == 0 { 1.0 } else { exceed as f64 / n_bootstrap as f64 };
    Ok(PowerLawFit {
        alpha: fit.alpha,
        x_min: fit.x_min,
        n,
        n_tail: fit.n_tail,
        ks_stat: fit.ks,
        p_value,
        accepted: p_value >= alpha_level,
    })
}
