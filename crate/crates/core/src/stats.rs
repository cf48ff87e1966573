//! Small order-statistics helpers shared by the feature extractors,
//! bandwidth selection and threshold choice.

use alloc::vec::Vec;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// 1-based nearest rank `ceil(q·len)`, clamped to `[1, len]`.
///
/// A relative slack of 1e-12 keeps products such as `0.7 · 10` (which is
/// `7.000000000000001` in binary) on the intended rank.
pub fn nearest_rank(q: f64, len: usize) -> usize {
    let raw = q * len as f64;
    let rank = (raw - raw.abs() * 1e-12).ceil();
    (rank.max(1.0) as usize).min(len)
}

/// Nearest-rank percentile: the value at 1-based index `ceil(q·M)` of the
/// ascending sort of `values`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("percentile of an empty sequence"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter("percentile q must lie in (0, 1]"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(q, sorted.len()) - 1])
}

/// Same as [`percentile`] but on data that is already sorted ascending.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty("percentile of an empty sequence"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter("percentile q must lie in (0, 1]"));
    }
    Ok(sorted[nearest_rank(q, sorted.len()) - 1])
}

/// Mean and population standard deviation. Returns `(0, 0)` for empty input.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}
