//! Full-covariance Gaussian mixture: log-density scoring and EM fitting.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::Cholesky;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::seeded_rng;

/// Mixture `Σ_l π_l·N(z; μ_l, Σ_l)` with precomputed Cholesky factors.
#[derive(Debug, Clone)]
pub struct GmmModel {
    weights: Vec<f64>,
    means: Matrix,
    covariances: Vec<Matrix>,
    /// Row-major lower Cholesky factor per component.
    chol: Vec<Vec<f64>>,
    /// `ln π_l − ½(d·ln 2π + ln|Σ_l|)` per component.
    log_norm: Vec<f64>,
}

impl PartialEq for GmmModel {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.means == other.means
            && self.covariances == other.covariances
    }
}

impl GmmModel {
    pub fn new(weights: Vec<f64>, means: Matrix, covariances: Vec<Matrix>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component",
            ));
        }
        if means.rows() != k || covariances.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: means.rows().min(covariances.len()),
            });
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "mixture weights must be finite and non-negative",
            ));
        }
        let d = means.cols();
        let mut chol = Vec::with_capacity(k);
        let mut log_norm = Vec::with_capacity(k);
        for (cov, &w) in covariances.iter().zip(&weights) {
            if cov.rows() != d || cov.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: cov.rows(),
                });
            }
            let factor = Cholesky::new(cov.to_dmatrix()).ok_or(Error::NotPositiveDefinite)?;
            let l = factor.l();
            let mut lower = alloc::vec![0.0; d * d];
            let mut log_det = 0.0;
            for i in 0..d {
                for j in 0..=i {
                    lower[i * d + j] = l[(i, j)];
                }
                log_det += 2.0 * l[(i, i)].ln();
            }
            chol.push(lower);
            log_norm.push(w.ln() - 0.5 * (d as f64 * (2.0 * PI).ln() + log_det));
        }
        Ok(Self {
            weights,
            means,
            covariances,
            chol,
            log_norm,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &Matrix {
        &self.means
    }

    pub fn covariances(&self) -> &[Matrix] {
        &self.covariances
    }

    /// Per-component `ln(π_l·N(z; μ_l, Σ_l))` written into `out`.
    fn component_log_terms(&self, z: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let d = self.dim();
        for (l, term) in out.iter_mut().enumerate().take(self.k()) {
            let mu = self.means.row(l);
            let lower = &self.chol[l];
            // forward substitution L·y = z − μ
            let mut maha = 0.0;
            for i in 0..d {
                let mut s = z[i] - mu[i];
                for j in 0..i {
                    s -= lower[i * d + j] * scratch[j];
                }
                let y = s / lower[i * d + i];
                scratch[i] = y;
                maha += y * y;
            }
            *term = self.log_norm[l] - 0.5 * maha;
        }
    }

    /// `ln f(z)` via log-sum-exp.
    pub fn log_pdf(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut scratch = alloc::vec![0.0; self.dim()];
        let mut terms = alloc::vec![0.0; self.k()];
        Ok(self.log_pdf_with(z, &mut scratch, &mut terms))
    }

    /// Allocation-free scoring; buffers must hold `d` and `k` values. No input checks.
    #[inline]
    pub fn log_pdf_with(&self, z: &[f64], scratch: &mut [f64], terms: &mut [f64]) -> f64 {
        self.component_log_terms(z, scratch, terms);
        log_sum_exp(terms)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Output of the expectation step.
#[derive(Debug, Clone)]
pub struct EStep {
    /// `n×k`, rows sum to one.
    pub responsibilities: Matrix,
    /// `ln f(xᵢ)` per point.
    pub point_log_pdf: Vec<f64>,
    pub mean_log_likelihood: f64,
}

pub fn e_step(model: &GmmModel, x: &Matrix) -> Result<EStep> {
    if x.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.cols(),
        });
    }
    let (n, k) = (x.rows(), model.k());
    let mut resp = Matrix::zeros(n, k);
    let mut point_log_pdf = Vec::with_capacity(n);
    let mut scratch = alloc::vec![0.0; model.dim()];
    for i in 0..n {
        let row = resp.row_mut(i);
        model.component_log_terms(x.row(i), &mut scratch, row);
        let lse = log_sum_exp(row);
        row.iter_mut().for_each(|r| *r = (*r - lse).exp());
        point_log_pdf.push(lse);
    }
    let mean_log_likelihood = point_log_pdf.iter().sum::<f64>() / n.max(1) as f64;
    Ok(EStep {
        responsibilities: resp,
        point_log_pdf,
        mean_log_likelihood,
    })
}

/// Default covariance ridge: `1e-6 ×` the mean per-feature variance.
pub fn default_reg(x: &Matrix) -> f64 {
    let cov = x.covariance();
    let d = cov.rows().max(1);
    let mean_var = (0..cov.rows()).map(|i| cov[(i, i)]).sum::<f64>() / d as f64;
    if mean_var > 0.0 {
        1e-6 * mean_var
    } else {
        1e-6
    }
}

/// Maximization step. Components whose total responsibility falls below
/// `1e-10·n` are re-seeded at the worst-scored point; the count of such
/// re-seeds is returned alongside the model.
pub fn m_step(x: &Matrix, estep: &EStep, reg: f64) -> Result<(GmmModel, usize)> {
    let resp = &estep.responsibilities;
    let (n, d, k) = (x.rows(), x.cols(), resp.cols());
    if resp.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: resp.rows(),
        });
    }
    if n == 0 {
        return Err(Error::Empty("m_step on empty data"));
    }
    let mut weights = alloc::vec![0.0; k];
    let mut means = Matrix::zeros(k, d);
    let mut covariances = Vec::with_capacity(k);
    let mut reseeded = 0;
    let mut fallback_cov: Option<Matrix> = None;
    let mut centered = alloc::vec![0.0; d];

    for l in 0..k {
        let total: f64 = (0..n).map(|i| resp[(i, l)]).sum();
        if total < 1e-10 * n as f64 {
            reseeded += 1;
            let worst = estep
                .point_log_pdf
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (i, &v)| if v < best.1 { (i, v) } else { best },
                )
                .0;
            means.row_mut(l).copy_from_slice(x.row(worst));
            weights[l] = 1.0 / n as f64;
            let cov = fallback_cov.get_or_insert_with(|| {
                let mut c = x.covariance();
                for i in 0..d {
                    c[(i, i)] += reg;
                }
                c
            });
            covariances.push(cov.clone());
            continue;
        }
        weights[l] = total / n as f64;
        let mu = means.row_mut(l);
        for i in 0..n {
            let r = resp[(i, l)];
            for (m, v) in mu.iter_mut().zip(x.row(i)) {
                *m += r * v;
            }
        }
        mu.iter_mut().for_each(|m| *m /= total);
        let mu = means.row(l).to_vec();
        let mut cov = Matrix::zeros(d, d);
        for i in 0..n {
            let r = resp[(i, l)];
            for j in 0..d {
                centered[j] = x[(i, j)] - mu[j];
            }
            for a in 0..d {
                let ra = r * centered[a];
                for b in a..d {
                    cov[(a, b)] += ra * centered[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / total;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
            cov[(a, a)] += reg;
        }
        covariances.push(cov);
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Ok((GmmModel::new(weights, means, covariances)?, reseeded))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Stop once the mean log-likelihood changes by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Covariance ridge; `None` uses [`default_reg`].
    pub reg: Option<f64>,
    pub seed: u64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 200,
            reg: None,
            seed: 0,
        }
    }
}

/// Starting parameters (for example, cluster moments from mode seeking).
#[derive(Debug, Clone, PartialEq)]
pub struct GmmInit {
    pub weights: Vec<f64>,
    pub means: Matrix,
    pub covariances: Vec<Matrix>,
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GmmModel,
    /// Mean log-likelihood of each visited parameter set, first entry is the start.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of component re-seeds performed by the M-step.
    pub reseeded: usize,
}

impl GmmFit {
    /// Largest single-iteration drop in mean log-likelihood (0 when monotone).
    pub fn worst_decrease(&self) -> f64 {
        self.log_likelihood
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// EM with the given initial parameters, or k-means++ seeding when `init` is `None`.
pub fn fit_em(x: &Matrix, k: usize, init: Option<GmmInit>, opts: &EmOptions) -> Result<GmmFit> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if k > n {
        return Err(Error::TooFewPoints { needed: k, got: n });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let reg = opts.reg.unwrap_or_else(|| default_reg(x));
    let mut reseeded = 0;
    let mut model = match init {
        Some(init) => {
            if init.weights.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: init.weights.len(),
                });
            }
            GmmModel::new(init.weights, init.means, init.covariances)?
        }
        None => {
            let hard = kmeans_pp_assignment(x, k, opts.seed);
            let (m, r) = m_step(x, &hard, reg)?;
            reseeded += r;
            m
        }
    };

    let mut estep = e_step(&model, x)?;
    let mut history = alloc::vec![estep.mean_log_likelihood];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let (next, r) = m_step(x, &estep, reg)?;
        reseeded += r;
        let next_e = e_step(&next, x)?;
        iterations += 1;
        let delta = next_e.mean_log_likelihood - estep.mean_log_likelihood;
        history.push(next_e.mean_log_likelihood);
        model = next;
        estep = next_e;
        if delta.abs() < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(GmmFit {
        model,
        log_likelihood: history,
        iterations,
        converged,
        reseeded,
    })
}

/// k-means++ seeding followed by a hard nearest-seed assignment, expressed as
/// a one-hot E-step so the regular M-step can turn it into parameters.
fn kmeans_pp_assignment(x: &Matrix, k: usize, seed: u64) -> EStep {
    let n = x.rows();
    let mut rng = seeded_rng(seed);
    let mut centers: Vec<usize> = Vec::with_capacity(k);
    centers.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(centers[0])))
        .collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(next);
        for (i, best) in nearest.iter_mut().enumerate() {
            *best = best.min(squared_distance(x.row(i), x.row(next)));
        }
    }
    let mut resp = Matrix::zeros(n, k);
    for i in 0..n {
        let mut best = (0, f64::INFINITY);
        for (l, &c) in centers.iter().enumerate() {
            let dist = squared_distance(x.row(i), x.row(c));
            if dist < best.1 {
                best = (l, dist);
            }
        }
        resp[(i, best.0)] = 1.0;
    }
    EStep {
        responsibilities: resp,
        point_log_pdf: nearest.iter().map(|v| -v).collect(),
        mean_log_likelihood: f64::NEG_INFINITY,
    }
}

/// Serialized size of the mixture block: `u32` k and `8·k·(1 + d + d²)` bytes
/// of weights, means and covariances.
pub fn gmm_bytes(model: &GmmModel) -> usize {
    gmm_bytes_for(model.k(), model.dim())
}

pub fn gmm_bytes_for(k: usize, d: usize) -> usize {
    4 + 8 * k * (1 + d + d * d)
}
