//! One-sample Kolmogorov–Smirnov distance.

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `sup |F_n - F|` for ascending `sorted` samples. Ties are handled by
/// evaluating both sides of every jump of the empirical CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    d
}

pub(crate) fn sort_floats(xs: &mut [f64]) {
    xs.sort_by(|a, b| a.total_cmp(b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-12);
    }

    #[test]
    fn ks_against_uniform_by_hand() {
        // F_n steps at 0.1, 0.5, 0.9 against F(x) = x:
        // max over points of {1/3-0.1, 0.1-0, 2/3-0.5, 0.5-1/3, 1-0.9, 0.9-2/3}.
        let d = ks_distance(&[0.1, 0.5, 0.9], |x| x);
        assert!((d - (0.9 - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn ties_count_as_one_jump() {
        let d = ks_distance(&[0.5, 0.5], |x| x);
        assert!((d - 0.5).abs() < 1e-12);
    }
}
