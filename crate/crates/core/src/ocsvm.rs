//! Gaussian-kernel ν-one-class SVM trained by SMO on the dual
//!
//! ```text
//! min ½ αᵀQα   s.t.  0 ≤ αᵢ ≤ 1/(νn),  Σ αᵢ = 1,   Q = gram(X, X, h)
//! ```
//!
//! using maximal-violating-pair working sets and an LRU cache of `Q` rows.
//! The decision function is `f(x) = Σ αᵢ K(xᵢ, x)` compared against `ρ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{kernel_unchecked, Bandwidth};
use crate::matrix::Matrix;

/// Dual coefficients at or below this are not support vectors.
pub const SV_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcsvmParams {
    pub nu: f64,
    /// Stopping tolerance on the violating-pair gap, expressed on the
    /// `Σα = νn` scale used by libsvm (the gap on the `Σα = 1` scale is
    /// `tol / (νn)`).
    pub tol: f64,
    pub max_iter: u64,
    /// Byte budget for cached kernel rows.
    pub cache_bytes: usize,
}

impl Default for OcsvmParams {
    fn default() -> Self {
        Self {
            nu: 0.5,
            tol: 1e-3,
            max_iter: 10_000_000,
            cache_bytes: 256 << 20,
        }
    }
}

/// Support vectors, their coefficients and the offset `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcsvmModel {
    pub support_vectors: Matrix,
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub bandwidth: Bandwidth,
}

impl OcsvmModel {
    pub fn n_support(&self) -> usize {
        self.alpha.len()
    }

    pub fn input_dim(&self) -> usize {
        self.support_vectors.cols()
    }

    /// `f(x) = Σ αᵢ K(svᵢ, x)`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(self.decision_value_unchecked(x))
    }

    #[inline]
    pub fn decision_value_unchecked(&self, x: &[f64]) -> f64 {
        let gamma = self.bandwidth.gamma();
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| a * kernel_unchecked(self.support_vectors.row(i), x, gamma))
            .sum()
    }

    /// `f(x) − ρ`; negative means novel at the default threshold.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.decision_value(x)? - self.rho)
    }

    pub fn score_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.cols(),
            });
        }
        Ok(x.iter_rows()
            .map(|r| self.decision_value_unchecked(r) - self.rho)
            .collect())
    }
}

/// Trained model plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct OcsvmFit {
    pub model: OcsvmModel,
    /// Dual coefficients for every training point.
    pub alpha_full: Vec<f64>,
    pub objective: f64,
    /// Final violating-pair gap on the `Σα = 1` scale.
    pub gap: f64,
    pub iterations: u64,
    /// `false` when `max_iter` was hit; the model is then the last iterate.
    pub converged: bool,
    /// Kernel evaluations spent filling the row cache.
    pub kernel_evals: u64,
}

struct RowCache<'a> {
    x: &'a Matrix,
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
    stamp: Vec<u64>,
    cached: usize,
    capacity: usize,
    clock: u64,
    evals: u64,
}

impl<'a> RowCache<'a> {
    fn new(x: &'a Matrix, gamma: f64, budget: usize) -> Self {
        let n = x.rows();
        let capacity = (budget / (8 * n.max(1))).clamp(2, n.max(2));
        Self {
            x,
            gamma,
            rows: (0..n).map(|_| None).collect(),
            stamp: alloc::vec![0; n],
            cached: 0,
            capacity,
            clock: 0,
            evals: 0,
        }
    }

    fn ensure(&mut self, i: usize) {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if self.rows[i].is_some() {
            return;
        }
        if self.cached == self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&t| self.rows[t].is_some())
                .min_by_key(|&t| self.stamp[t])
                .expect("cache is non-empty when full");
            self.rows[victim] = None;
            self.cached -= 1;
        }
        let xi = self.x.row(i);
        let row: Vec<f64> = self
            .x
            .iter_rows()
            .map(|xj| kernel_unchecked(xi, xj, self.gamma))
            .collect();
        self.evals += row.len() as u64;
        self.rows[i] = Some(row);
        self.cached += 1;
    }

    fn get(&self, i: usize) -> &[f64] {
        self.rows[i].as_deref().expect("row ensured before use")
    }
}

pub fn train_ocsvm(x: &Matrix, h: Bandwidth, params: &OcsvmParams) -> Result<OcsvmFit> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(Error::InvalidParameter("nu must lie in (0, 1]"));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let upper = 1.0 / (params.nu * n as f64);
    let gap_tol = params.tol / (params.nu * n as f64);
    let mut cache = RowCache::new(x, h.gamma(), params.cache_bytes);

    // libsvm's starting point: the first ⌊νn⌋ coefficients at the bound, the
    // remainder on the next one
    let mut alpha = alloc::vec![0.0; n];
    let mut remaining = 1.0f64;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        *a = remaining.min(upper);
        remaining -= *a;
    }
    let mut grad = alloc::vec![0.0; n];
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            cache.ensure(i);
            let row = cache.get(i);
            for (g, q) in grad.iter_mut().zip(row) {
                *g += a * q;
            }
        }
    }

    let mut iterations = 0u64;
    let mut converged = false;
    let mut gap;
    loop {
        let (i, j, g) = select_pair(&alpha, &grad, upper);
        gap = g;
        if gap <= gap_tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        iterations += 1;
        cache.ensure(i);
        cache.ensure(j);
        let (qi, qj) = (cache.get(i), cache.get(j));
        let eta = (qi[i] + qj[j] - 2.0 * qi[j]).max(1e-12);
        let mut delta = gap / eta;
        let room_i = upper - alpha[i];
        let room_j = alpha[j];
        if delta >= room_i {
            delta = room_i;
        }
        if delta >= room_j {
            delta = room_j;
        }
        alpha[i] = if delta == room_i {
            upper
        } else {
            alpha[i] + delta
        };
        alpha[j] = if delta == room_j {
            0.0
        } else {
            alpha[j] - delta
        };
        for ((g, a), b) in grad.iter_mut().zip(qi).zip(qj) {
            *g += delta * (a - b);
        }
    }

    let rho = offset(&alpha, &grad, upper);
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
    let sv: Vec<usize> = (0..n).filter(|&i| alpha[i] > SV_EPS).collect();
    let model = OcsvmModel {
        support_vectors: x.select_rows(&sv),
        alpha: sv.iter().map(|&i| alpha[i]).collect(),
        rho,
        bandwidth: h,
    };
    Ok(OcsvmFit {
        model,
        alpha_full: alpha,
        objective,
        gap,
        iterations,
        converged,
        kernel_evals: cache.evals,
    })
}

/// Maximal violating pair: `i` minimizes the gradient over coefficients that
/// can grow, `j` maximizes it over coefficients that can shrink.
fn select_pair(alpha: &[f64], grad: &[f64], upper: f64) -> (usize, usize, f64) {
    let mut i = usize::MAX;
    let mut g_min = f64::INFINITY;
    let mut j = usize::MAX;
    let mut g_max = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        if alpha[t] < upper && grad[t] < g_min {
            g_min = grad[t];
            i = t;
        }
        if alpha[t] > 0.0 && grad[t] > g_max {
            g_max = grad[t];
            j = t;
        }
    }
    if i == usize::MAX || j == usize::MAX {
        return (0, 0, 0.0);
    }
    (i, j, g_max - g_min)
}

/// Mean gradient over free coefficients, else the midpoint of the KKT interval.
fn offset(alpha: &[f64], grad: &[f64], upper: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut upper_bound = f64::INFINITY;
    for (&a, &g) in alpha.iter().zip(grad) {
        if a >= upper {
            lower_bound = lower_bound.max(g);
        } else if a <= 0.0 {
            upper_bound = upper_bound.min(g);
        } else {
            free_sum += g;
            free += 1;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if lower_bound.is_finite() && upper_bound.is_finite() {
        0.5 * (lower_bound + upper_bound)
    } else if lower_bound.is_finite() {
        lower_bound
    } else {
        upper_bound
    }
}

/// Serialized size of an OCSVM model file: magic, version, `u32` ñ and D,
/// then `8·(ñ·(D+1) + 2)` bytes of support vectors, coefficients, ρ and h.
pub fn ocsvm_bytes(model: &OcsvmModel) -> usize {
    ocsvm_bytes_for(model.n_support(), model.input_dim())
}

pub fn ocsvm_bytes_for(n_support: usize, input_dim: usize) -> usize {
    OCSVM_HEADER_BYTES + 8 * (n_support * (input_dim + 1) + 2)
}

/// `OSVM` + version byte + two `u32` counts.
pub const OCSVM_HEADER_BYTES: usize = 4 + 1 + 4 + 4;
