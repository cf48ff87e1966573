//! Gaussian kernel `K(x, y) = exp(−‖x − y‖² / h²)` and bandwidth selection.

use alloc::vec::Vec;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::stats::nearest_rank;

/// Kernel bandwidth `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(Error::InvalidBandwidth(h))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 / h²`, the factor applied to squared distances.
    #[inline]
    pub fn gamma(self) -> f64 {
        1.0 / (self.0 * self.0)
    }
}

pub fn gaussian_kernel(x: &[f64], y: &[f64], h: Bandwidth) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok((-squared_distance(x, y) * h.gamma()).exp())
}

#[inline]
pub(crate) fn kernel_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    (-squared_distance(x, y) * gamma).exp()
}

/// All `n(n−1)/2` Euclidean distances between rows, sorted ascending.
pub fn pairwise_distances(x: &Matrix) -> Result<Vec<f64>> {
    let mut d = unsorted_distances(x)?;
    d.sort_unstable_by(f64::total_cmp);
    Ok(d)
}

fn unsorted_distances(x: &Matrix) -> Result<Vec<f64>> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            d.push(squared_distance(xi, x.row(j)).sqrt());
        }
    }
    Ok(d)
}

/// Nearest-rank `q`-quantile of the pairwise distances. A zero quantile is
/// replaced by the smallest strictly positive distance.
pub fn quantile_bandwidth(x: &Matrix, q: f64) -> Result<Bandwidth> {
    check_q(q)?;
    let mut d = unsorted_distances(x)?;
    let rank = nearest_rank(q, d.len());
    let (_, &mut value, _) = d.select_nth_unstable_by(rank - 1, f64::total_cmp);
    if value > 0.0 {
        return Bandwidth::new(value);
    }
    smallest_positive(&d)
}

/// Bandwidth from an already sorted distance list (see [`pairwise_distances`]).
pub fn quantile_bandwidth_sorted(sorted: &[f64], q: f64) -> Result<Bandwidth> {
    check_q(q)?;
    if sorted.is_empty() {
        return Err(Error::TooFewPoints { needed: 2, got: 1 });
    }
    let value = sorted[nearest_rank(q, sorted.len()) - 1];
    if value > 0.0 {
        return Bandwidth::new(value);
    }
    smallest_positive(sorted)
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "bandwidth quantile must lie in (0, 1]",
        ))
    }
}

fn smallest_positive(d: &[f64]) -> Result<Bandwidth> {
    d.iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        })
        .ok_or(Error::Degenerate("all points are identical"))
        .and_then(Bandwidth::new)
}

/// `G[i, j] = K(xᵢ, yⱼ)`.
pub fn gram(x: &Matrix, y: &Matrix, h: Bandwidth) -> Result<Matrix> {
    if x.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            expected: x.cols(),
            got: y.cols(),
        });
    }
    let gamma = h.gamma();
    let mut g = Matrix::zeros(x.rows(), y.rows());
    for i in 0..x.rows() {
        let xi = x.row(i);
        for (j, out) in g.row_mut(i).iter_mut().enumerate() {
            *out = kernel_unchecked(xi, y.row(j), gamma);
        }
    }
    Ok(g)
}

/// Writes `[K(x, l₁), …, K(x, l_m)]` into `out`.
#[inline]
pub(crate) fn kernel_vector_into(x: &[f64], landmarks: &Matrix, gamma: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = kernel_unchecked(x, landmarks.row(j), gamma);
    }
}
