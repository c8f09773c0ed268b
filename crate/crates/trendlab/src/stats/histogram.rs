use std::io::Write;

use serde::Serialize;

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Bins `[k·width, (k+1)·width)`.
    Linear { width: f64 },
    /// Bins `[base^k, base^(k+1))`; positive samples only.
    Log { base: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistRow {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// `count / (n · (hi - lo))`
    pub density: f64,
}

fn log_bin(x: f64, base: f64) -> i32 {
    let mut k = (x.ln() / base.ln()).floor() as i32;
    // guard against rounding at exact powers
    while base.powi(k) > x {
        k -= 1;
    }
    while base.powi(k + 1) <= x {
        k += 1;
    }
    k
}

/// Every bin from the smallest to the largest sample, empty ones included.
pub fn histogram(samples: &[f64], binning: Binning) -> Result<Vec<HistRow>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let index: Vec<i64> = match binning {
        Binning::Linear { width } => {
            if !(width > 0.0) {
                return Err(StatsError::BadBinning);
            }
            samples.iter().map(|x| (x / width).floor() as i64).collect()
        }
        Binning::Log { base } => {
            if !(base > 1.0) {
                return Err(StatsError::BadBinning);
            }
            if let Some(&bad) = samples.iter().find(|x| !(**x > 0.0)) {
                return Err(StatsError::NonPositive(bad));
            }
            samples.iter().map(|&x| log_bin(x, base) as i64).collect()
        }
    };
    let lo = *index.iter().min().expect("nonempty");
    let hi = *index.iter().max().expect("nonempty");
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for k in &index {
        counts[(k - lo) as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let k = lo + i as i64;
            let (a, b) = match binning {
                Binning::Linear { width } => (k as f64 * width, (k + 1) as f64 * width),
                Binning::Log { base } => (base.powi(k as i32), base.powi(k as i32 + 1)),
            };
            HistRow {
                lo: a,
                hi: b,
                count,
                density: count as f64 / (n * (b - a)),
            }
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(w: &mut W, rows: &[HistRow]) -> std::io::Result<()> {
    writeln!(w, "lo,hi,count,density")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.lo, r.hi, r.count, r.density)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(rows: &[HistRow]) -> Vec<(f64, u64)> {
        rows.iter().map(|r| (r.lo, r.count)).collect()
    }

    #[test]
    fn linear_unit_bins() {
        let rows = histogram(&[1.0, 1.0, 2.0], Binning::Linear { width: 1.0 }).unwrap();
        assert_eq!(counts(&rows), vec![(1.0, 2), (2.0, 1)]);
        assert!((rows[0].density - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn log_base_two() {
        let rows = histogram(&[1.0, 2.0, 3.0, 4.0], Binning::Log { base: 2.0 }).unwrap();
        let got: Vec<(f64, f64, u64)> = rows.iter().map(|r| (r.lo, r.hi, r.count)).collect();
        assert_eq!(got, vec![(1.0, 2.0, 1), (2.0, 4.0, 2), (4.0, 8.0, 1)]);
    }

    #[test]
    fn log_bins_exact_powers_of_ten() {
        let rows = histogram(&[1000.0, 999.0], Binning::Log { base: 10.0 }).unwrap();
        assert_eq!(counts(&rows), vec![(100.0, 1), (1000.0, 1)]);
    }

    #[test]
    fn empty_and_invalid() {
        assert_eq!(histogram(&[], Binning::Linear { width: 1.0 }), Err(StatsError::EmptyInput));
        assert_eq!(histogram(&[1.0], Binning::Linear { width: 0.0 }), Err(StatsError::BadBinning));
        assert_eq!(histogram(&[0.0], Binning::Log { base: 2.0 }), Err(StatsError::NonPositive(0.0)));
    }
}
