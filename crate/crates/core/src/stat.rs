//! Small shared numeric helpers.

use alloc::vec::Vec;

pub(crate) fn mean(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance, i.e. mean squared deviation (divisor N).
pub(crate) fn variance_pop(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (divisor N − 1); 0 for a single value.
pub(crate) fn sd_sample(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Mean of squared entries: the (1/N)·Σ x² norm used by the order score.
pub(crate) fn mean_square(xs: &[f64]) -> f64 {
    xs.iter().map(|&x| x * x).sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of pre-sorted data (the convention with
/// plotting position (n−1)·q, matching common statistical software).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    let w = h - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Ascending copy of `xs`; NaNs are the caller's responsibility.
pub(crate) fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in numeric columns"));
    v
}
