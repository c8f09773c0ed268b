use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::ks::{ks_distance, normal_cdf, sort_floats};
use super::StatsError;
use crate::rng::{streams, substream};

pub const MIN_SAMPLES: usize = 20;
pub const DEFAULT_BOOTSTRAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub ks_stat: f64,
    pub p_value: f64,
    pub accepted: bool,
    pub n: usize,
}

/// Maximum-likelihood normal parameters `(mean, sd)` of `logs`.
fn normal_mle(logs: &[f64]) -> (f64, f64) {
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    (mu, var.sqrt())
}

/// KS distance of `logs` (sorted in place) from the normal fitted to them.
fn lilliefors_stat(logs: &mut [f64]) -> (f64, f64, f64) {
    let (mu, sigma) = normal_mle(logs);
    sort_floats(logs);
    let d = ks_distance(logs, |x| normal_cdf((x - mu) / sigma));
    (mu, sigma, d)
}

/// Fits a log-normal by ML on the logs and scores it with a parametric
/// bootstrap of the KS distance: each replicate is drawn from the fitted
/// law and refitted before measuring its own distance.
pub fn fit_lognormal(samples: &[f64], alpha: f64, n_bootstrap: usize, seed: u64) -> Result<LogNormalFit, StatsError> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { needed: MIN_SAMPLES, got: n });
    }
    if let Some(&bad) = samples.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(StatsError::NonPositive(bad));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(StatsError::DegenerateSamples);
    }
    let mut logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let (mu, sigma, ks_stat) = lilliefors_stat(&mut logs);
    if !(sigma > 0.0) {
        return Err(StatsError::DegenerateSamples);
    }

    let law = Normal::new(mu, sigma).map_err(|_| StatsError::DegenerateSamples)?;
    let mut rng = substream(seed, streams::BOOTSTRAP);
    let mut exceed = 0usize;
    let mut buf = vec![0.0; n];
    for _ in 0..n_bootstrap {
        for x in buf.iter_mut() {
            *x = law.sample(&mut rng);
        }
        let (_, _, d) = lilliefors_stat(&mut buf);
        if d > ks_stat {
            exceed += 1;
        }
    }
    let p_value = if n_bootstrap == 0 { 1.0 } else { exceed as f64 / n_bootstrap as f64 };
    Ok(LogNormalFit {
        mu,
        sigma,
        ks_stat,
        p_value,
        accepted: p_value >= alpha,
        n,
    })
}

/// One distinct `(numerator, denominator)` pair and how often it occurs.
#[derive(Debug, Clone, Copy)]
struct Cell {
    num: u64,
    den: u64,
    count: usize,
}

/// `a/b < c/d` etc. without rounding.
fn cmp_ratio(a: u64, b: u64, c: u64, d: u64) -> std::cmp::Ordering {
    (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
}

/// Sorts pairs by ratio and collapses repeats.
fn cells(pairs: &mut [(u64, u64)]) -> Vec<Cell> {
    pairs.sort_unstable_by(|x, y| cmp_ratio(x.0, x.1, y.0, y.1).then(x.1.cmp(&y.1)));
    let mut out: Vec<Cell> = Vec::new();
    for &(num, den) in pairs.iter() {
        match out.last_mut() {
            Some(c) if c.num == num && c.den == den => c.count += 1,
            _ => out.push(Cell { num, den, count: 1 }),
        }
    }
    out
}

/// Latent log-ratio interval that rounds to the cell; the lowest cell of each
/// denominator also absorbs everything below it.
fn interval(c: &Cell) -> (f64, f64) {
    let d = c.den as f64;
    let hi = ((c.num as f64 + 0.5) / d).ln();
    let lo = if c.num <= c.den { f64::NEG_INFINITY } else { ((c.num as f64 - 0.5) / d).ln() };
    (lo, hi)
}

fn normal_pdf(z: f64) -> f64 {
    if z.is_finite() {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    } else {
        0.0
    }
}

/// Interval-censored normal MLE by EM, started from `(mu, sigma)`.
fn censored_normal_mle(cells: &[Cell], n: usize, mut mu: f64, mut sigma: f64) -> Option<(f64, f64)> {
    let bounds: Vec<(f64, f64)> = cells.iter().map(interval).collect();
    let n = n as f64;
    for _ in 0..2000 {
        let (mut s1, mut s2) = (0.0, 0.0);
        for (c, &(lo, hi)) in cells.iter().zip(&bounds) {
            let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
            let z = if a > 0.0 { normal_cdf(-a) - normal_cdf(-b) } else { normal_cdf(b) - normal_cdf(a) };
            let (m1, m2) = if z > 1e-300 {
                let (pa, pb) = (normal_pdf(a), normal_pdf(b));
                let apa = if a.is_finite() { a * pa } else { 0.0 };
                let shift = (pa - pb) / z;
                let var = sigma * sigma * (1.0 + (apa - b * pb) / z - shift * shift);
                let m = mu + sigma * shift;
                (m, var.max(0.0) + m * m)
            } else {
                let m = if lo.is_finite() { 0.5 * (lo + hi) } else { hi };
                (m, m * m)
            };
            s1 += c.count as f64 * m1;
            s2 += c.count as f64 * m2;
        }
        let next_mu = s1 / n;
        let next_sigma = (s2 / n - next_mu * next_mu).max(0.0).sqrt();
        if !(next_sigma > 1e-12) || !next_mu.is_finite() {
            return None;
        }
        let done = (next_mu - mu).abs() < 1e-9 && (next_sigma - sigma).abs() < 1e-9;
        mu = next_mu;
        sigma = next_sigma;
        if done {
            break;
        }
    }
    Some((mu, sigma))
}

/// KS distance between the observed ratios and the ratio law implied by the
/// fitted latent normal on the given denominators (a step function, so both
/// sides of every observed value are checked).
fn lattice_ks(cells: &[Cell], n: usize, dens: &[(u64, f64)], mu: f64, sigma: f64) -> f64 {
    let model = |num0: u64, den0: u64, strict: bool| -> f64 {
        dens.iter()
            .map(|&(d, w)| {
                let prod = num0 as u128 * d as u128;
                let m = if strict { (prod - 1) / den0 as u128 } else { prod / den0 as u128 } as u64;
                if m < d {
                    0.0
                } else {
                    w * normal_cdf((((m as f64 + 0.5) / d as f64).ln() - mu) / sigma)
                }
            })
            .sum()
    };
    let n = n as f64;
    let mut seen = 0usize;
    let mut dist: f64 = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let (num0, den0) = (cells[i].num, cells[i].den);
        let before = seen as f64 / n;
        while i < cells.len() && cmp_ratio(cells[i].num, cells[i].den, num0, den0).is_eq() {
            seen += cells[i].count;
            i += 1;
        }
        let after = seen as f64 / n;
        dist = dist
            .max((model(num0, den0, true) - before).abs())
            .max((model(num0, den0, false) - after).abs());
    }
    dist
}

/// Log-normal test for ratios of counts `num / den` with `num >= den`.
///
/// The ratio is modelled as a log-normal draw rounded onto its denominator's
/// lattice (`num = max(den, round(den * r))`). Parameters are the
/// interval-censored MLE of the latent law; the KS distance is taken against
/// the implied lattice distribution and calibrated by a parametric bootstrap
/// that keeps every sample's denominator.
pub fn fit_count_ratio_lognormal(
    numerators: &[u64],
    denominators: &[u64],
    alpha: f64,
    n_bootstrap: usize,
    seed: u64,
) -> Result<LogNormalFit, StatsError> {
    assert_eq!(numerators.len(), denominators.len(), "one denominator per ratio");
    let n = numerators.len();
    if n < MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { needed: MIN_SAMPLES, got: n });
    }
    if let Some(&bad) = denominators.iter().find(|&&d| d == 0) {
        return Err(StatsError::NonPositive(bad as f64));
    }
    if let Some((&a, &b)) = numerators.iter().zip(denominators).find(|(a, b)| a < b) {
        return Err(StatsError::NonPositive(a as f64 / b as f64));
    }
    let mut pairs: Vec<(u64, u64)> = numerators.iter().copied().zip(denominators.iter().copied()).collect();
    let observed = cells(&mut pairs);
    if observed.iter().all(|c| cmp_ratio(c.num, c.den, observed[0].num, observed[0].den).is_eq()) {
        return Err(StatsError::DegenerateSamples);
    }
    let logs: Vec<f64> = numerators
        .iter()
        .zip(denominators)
        .map(|(&a, &b)| (a as f64 / b as f64).ln())
        .collect();
    let (mu0, sigma0) = normal_mle(&logs);
    let (mu, sigma) = censored_normal_mle(&observed, n, mu0, sigma0).ok_or(StatsError::DegenerateSamples)?;

    let mut dens: Vec<(u64, f64)> = Vec::new();
    let mut sorted_dens = denominators.to_vec();
    sorted_dens.sort_unstable();
    for d in sorted_dens {
        match dens.last_mut() {
            Some(last) if last.0 == d => last.1 += 1.0,
            _ => dens.push((d, 1.0)),
        }
    }
    for w in dens.iter_mut() {
        w.1 /= n as f64;
    }
    let ks_stat = lattice_ks(&observed, n, &dens, mu, sigma);

    let law = Normal::new(mu, sigma).map_err(|_| StatsError::DegenerateSamples)?;
    let mut rng = substream(seed, streams::BOOTSTRAP);
    let mut exceed = 0usize;
    for _ in 0..n_bootstrap {
        for (p, &den) in pairs.iter_mut().zip(denominators) {
            let d = den as f64;
            let num = (d * law.sample(&mut rng).exp()).round().max(d).min(u64::MAX as f64 / 4.0) as u64;
            *p = (num, den);
        }
        let rep = cells(&mut pairs);
        // a replicate without a fit never counts as exceeding
        if let Some((m, s)) = censored_normal_mle(&rep, n, mu, sigma) {
            if lattice_ks(&rep, n, &dens, m, s) > ks_stat {
                exceed += 1;
            }
        }
    }
    let p_value = if n_bootstrap == 0 { 1.0 } else { exceed as f64 / n_bootstrap as f64 };
    Ok(LogNormalFit {
        mu,
        sigma,
        ks_stat,
        p_value,
        accepted: p_value >= alpha,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn rejects_small_and_degenerate_inputs() {
        assert!(matches!(
            fit_lognormal(&[1.0; 5], 0.05, 10, 1),
            Err(StatsError::TooFewSamples { .. })
        ));
        assert_eq!(fit_lognormal(&[2.0; 40], 0.05, 10, 1), Err(StatsError::DegenerateSamples));
        let mut xs = vec![1.5; 30];
        xs[3] = -1.0;
        assert_eq!(fit_lognormal(&xs, 0.05, 10, 1), Err(StatsError::NonPositive(-1.0)));
    }

    #[test]
    fn parameters_are_log_moments() {
        // logs are {0, ln 4} repeated: mean ln 2, population sd ln 2.
        let xs: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { 4.0 }).collect();
        let fit = fit_lognormal(&xs, 0.05, 0, 3).unwrap();
        assert!((fit.mu - 2f64.ln()).abs() < 1e-12);
        assert!((fit.sigma - 2f64.ln()).abs() < 1e-12);
        assert_eq!(fit.n, 40);
    }

    #[test]
    fn accepts_true_lognormal_rejects_bimodal() {
        let mut rng = substream(11, 0);
        let law = Normal::new(1.0f64, 0.5).unwrap();
        let good: Vec<f64> = (0..2000).map(|_| law.sample(&mut rng).exp()).collect();
        let fit = fit_lognormal(&good, 0.05, 200, 5).unwrap();
        assert!(fit.accepted, "{fit:?}");
        assert!((fit.mu - 1.0).abs() < 0.05);

        let bimodal: Vec<f64> = (0..2000)
            .map(|_| {
                let shift = if rng.random_bool(0.5) { 0.0 } else { 1.5 };
                (law.sample(&mut rng) + shift).exp()
            })
            .collect();
        let fit = fit_lognormal(&bimodal, 0.05, 200, 5).unwrap();
        assert!(!fit.accepted, "{fit:?}");
    }

    /// Ratios of counts drawn the way the lattice bootstrap assumes.
    fn count_ratios(mu: f64, sigma: f64, n: usize, seed: u64) -> (Vec<u64>, Vec<u64>) {
        let mut rng = substream(seed, 0);
        let law = Normal::new(mu, sigma).unwrap();
        (0..n)
            .map(|_| {
                let den = rng.random_range(1..6u64);
                let num = (den as f64 * law.sample(&mut rng).exp()).round().max(den as f64) as u64;
                (num, den)
            })
            .unzip()
    }

    #[test]
    fn lattice_ratios_rejected_by_continuous_test_accepted_by_count_test() {
        let (num, den) = count_ratios(1.5, 0.8, 1500, 3);
        let ratios: Vec<f64> = num.iter().zip(&den).map(|(a, b)| *a as f64 / *b as f64).collect();
        assert!(!fit_lognormal(&ratios, 0.05, 200, 1).unwrap().accepted);
        let fit = fit_count_ratio_lognormal(&num, &den, 0.05, 200, 1).unwrap();
        assert!(fit.accepted, "{fit:?}");
        // censored fit recovers the latent law despite rounding and clamping
        assert!((fit.mu - 1.5).abs() < 0.06, "{fit:?}");
        assert!((fit.sigma - 0.8).abs() < 0.06, "{fit:?}");
    }

    #[test]
    fn count_test_unbiased_at_unit_denominators() {
        let mut rng = substream(21, 0);
        let law = Normal::new(0.9f64, 0.7).unwrap();
        let num: Vec<u64> = (0..3000).map(|_| law.sample(&mut rng).exp().round().max(1.0) as u64).collect();
        let fit = fit_count_ratio_lognormal(&num, &vec![1; 3000], 0.05, 100, 2).unwrap();
        assert!((fit.mu - 0.9).abs() < 0.05, "{fit:?}");
        assert!((fit.sigma - 0.7).abs() < 0.05, "{fit:?}");
        assert!(fit.accepted, "{fit:?}");
    }

    #[test]
    fn count_test_rejects_two_populations() {
        let (mut num, mut den) = count_ratios(0.8, 0.4, 800, 4);
        let (n2, d2) = count_ratios(3.0, 0.4, 800, 5);
        num.extend(n2);
        den.extend(d2);
        let fit = fit_count_ratio_lognormal(&num, &den, 0.05, 200, 1).unwrap();
        assert!(!fit.accepted, "{fit:?}");
    }

    #[test]
    fn count_test_input_errors() {
        assert!(matches!(
            fit_count_ratio_lognormal(&[2; 5], &[1; 5], 0.05, 10, 1),
            Err(StatsError::TooFewSamples { .. })
        ));
        assert_eq!(
            fit_count_ratio_lognormal(&[4; 30], &[2; 30], 0.05, 10, 1),
            Err(StatsError::DegenerateSamples)
        );
        assert!(fit_count_ratio_lognormal(&[4; 30], &[0; 30], 0.05, 10, 1).is_err());
        assert!(fit_count_ratio_lognormal(&[1; 30], &[2; 30], 0.05, 10, 1).is_err());
    }

    #[test]
    fn same_seed_same_p() {
        let xs: Vec<f64> = (1..=50).map(|i| 1.0 + i as f64 * 0.37).collect();
        let a = fit_lognormal(&xs, 0.05, 100, 9).unwrap();
        let b = fit_lognormal(&xs, 0.05, 100, 9).unwrap();
        assert_eq!(a, b);
    }
}
