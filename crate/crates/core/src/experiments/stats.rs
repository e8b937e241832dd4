//! Order-statistic and binomial margins for Monte-Carlo comparisons.

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Distribution-free `z`-sigma band for the median: the order statistics
/// at ranks `n/2 ∓ z√n/2` (the rank of the median is Binomial(n, 1/2)).
pub fn median_band(values: &[f64], z: f64) -> (f64, f64) {
    assert!(!values.is_empty(), "median band of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let half_width = z * n.sqrt() / 2.0;
    let lo = (n / 2.0 - half_width).floor().max(1.0) as usize;
    let hi = (n / 2.0 + half_width).ceil().min(n) as usize;
    (v[lo - 1], v[hi - 1])
}

/// `z · sqrt(p(1 − p)/n)`.
pub fn binomial_margin(p: f64, n: usize, z: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    z * (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn band_brackets_median() {
        let v: Vec<f64> = (1..=50).map(f64::from).collect();
        let (lo, hi) = median_band(&v, 3.0);
        // 25 ∓ 10.6 → ranks 14 and 36
        assert_eq!((lo, hi), (14.0, 36.0));
        assert!(lo <= median(&v) && median(&v) <= hi);
        assert_eq!(median_band(&[7.0], 3.0), (7.0, 7.0));
    }

    #[test]
    fn margins() {
        assert_eq!(binomial_margin(0.0, 10, 3.0), 0.0);
        assert!((binomial_margin(0.5, 100, 3.0) - 0.15).abs() < 1e-15);
    }
}
