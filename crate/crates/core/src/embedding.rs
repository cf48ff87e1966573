//! Explicit kernel embeddings `φ'(x) = P·K(x)` built from a landmark
//! subsample `S_m` of the training data.
//!
//! * Nyström: `P = Λ^{-1/2}·Vᵀ` over the top-`d` eigenpairs of `K_II`.
//! * KJL (Gaussian sketch): `P = Z·K_II` with `Z` a `d×m` standard normal matrix.

use alloc::vec::Vec;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{gram, kernel_vector_into, Bandwidth};
use crate::matrix::{dot, Matrix};
use crate::seeded_rng;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const EIGEN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    Nystrom,
    Kjl,
}

impl EmbeddingKind {
    pub fn tag(self) -> u8 {
        match self {
            EmbeddingKind::Nystrom => 0,
            EmbeddingKind::Kjl => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(EmbeddingKind::Nystrom),
            1 => Some(EmbeddingKind::Kjl),
            _ => None,
        }
    }
}

/// A fitted projection: `m` landmarks in `ℝᴰ` and a `d×m` matrix `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub kind: EmbeddingKind,
    pub landmarks: Matrix,
    pub projection: Matrix,
    pub bandwidth: Bandwidth,
}

impl EmbeddingModel {
    /// Assembles a model from parts, checking shapes.
    pub fn new(
        kind: EmbeddingKind,
        landmarks: Matrix,
        projection: Matrix,
        bandwidth: Bandwidth,
    ) -> Result<Self> {
        if projection.cols() != landmarks.rows() {
            return Err(Error::DimensionMismatch {
                expected: landmarks.rows(),
                got: projection.cols(),
            });
        }
        if projection.rows() > landmarks.rows() || landmarks.rows() == 0 || projection.rows() == 0 {
            return Err(Error::InvalidParameter("embedding needs 1 ≤ d ≤ m"));
        }
        Ok(Self {
            kind,
            landmarks,
            projection,
            bandwidth,
        })
    }

    pub fn m(&self) -> usize {
        self.landmarks.rows()
    }

    pub fn d(&self) -> usize {
        self.projection.rows()
    }

    /// Input dimension `D`.
    pub fn input_dim(&self) -> usize {
        self.landmarks.cols()
    }

    /// Embeds one point. `scratch` must hold `m` values; `out` receives `d`.
    pub fn embed_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        kernel_vector_into(x, &self.landmarks, self.bandwidth.gamma(), scratch);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.projection.row(i), scratch);
        }
        Ok(())
    }

    pub fn embed_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = alloc::vec![0.0; self.m()];
        let mut out = alloc::vec![0.0; self.d()];
        self.embed_into(x, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Row `i` of the result is `P·K(xᵢ)`.
    pub fn embed(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.cols(),
            });
        }
        let mut out = Matrix::zeros(x.rows(), self.d());
        let mut scratch = alloc::vec![0.0; self.m()];
        for i in 0..x.rows() {
            self.embed_into(x.row(i), &mut scratch, out.row_mut(i))?;
        }
        Ok(out)
    }
}

fn check_sizes(x: &Matrix, m: usize, d: usize) -> Result<()> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter("m and d must be positive"));
    }
    if m > x.rows() {
        return Err(Error::TooFewPoints {
            needed: m,
            got: x.rows(),
        });
    }
    if d > m {
        return Err(Error::InvalidParameter("d must not exceed m"));
    }
    Ok(())
}

fn sample_landmarks<R: Rng>(x: &Matrix, m: usize, rng: &mut R) -> Matrix {
    let idx = index::sample(rng, x.rows(), m).into_vec();
    x.select_rows(&idx)
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue (stable,
/// so ties keep the solver's order). Each eigenvector is sign-normalized so
/// its largest-magnitude entry is positive.
pub(crate) fn sorted_eigenpairs(a: &Matrix) -> Vec<(f64, Vec<f64>)> {
    let eig = a.to_dmatrix().symmetric_eigen();
    let n = a.rows();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|c| {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let pivot = v.iter().copied().fold(
                0.0f64,
                |best, x| if x.abs() > best.abs() { x } else { best },
            );
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[c], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Nyström embedding with a rank-`d` pseudo-inverse of `K_II`.
pub fn fit_nystrom(
    x: &Matrix,
    m: usize,
    d: usize,
    h: Bandwidth,
    seed: u64,
) -> Result<EmbeddingModel> {
    check_sizes(x, m, d)?;
    let mut rng = seeded_rng(seed);
    let landmarks = sample_landmarks(x, m, &mut rng);
    let k_ii = gram(&landmarks, &landmarks, h)?;
    let pairs = sorted_eigenpairs(&k_ii);
    let top = pairs[0].0;
    let mut projection = Matrix::zeros(d, m);
    for (i, (lambda, v)) in pairs.iter().take(d).enumerate() {
        if *lambda <= 0.0 || *lambda < EIGEN_CUTOFF * top {
            continue;
        }
        let scale = 1.0 / lambda.sqrt();
        for (p, vj) in projection.row_mut(i).iter_mut().zip(v) {
            *p = scale * vj;
        }
    }
    EmbeddingModel::new(EmbeddingKind::Nystrom, landmarks, projection, h)
}

/// Gaussian-sketch embedding `P = Z·K_II`.
pub fn fit_kjl(x: &Matrix, m: usize, d: usize, h: Bandwidth, seed: u64) -> Result<EmbeddingModel> {
    check_sizes(x, m, d)?;
    let mut rng = seeded_rng(seed);
    let landmarks = sample_landmarks(x, m, &mut rng);
    let k_ii = gram(&landmarks, &landmarks, h)?;
    let z: Vec<f64> = (0..d * m).map(|_| rng.sample(StandardNormal)).collect();
    let mut projection = Matrix::zeros(d, m);
    for i in 0..d {
        let zi = &z[i * m..(i + 1) * m];
        for j in 0..m {
            // K_II is symmetric, so column j equals row j
            projection[(i, j)] = dot(zi, k_ii.row(j));
        }
    }
    EmbeddingModel::new(EmbeddingKind::Kjl, landmarks, projection, h)
}

/// Serialized size of an embedding block: `u32` m, d, D, the landmarks,
/// `P`, and `h`.
pub fn embedding_bytes(model: &EmbeddingModel) -> usize {
    embedding_bytes_for(model.m(), model.d(), model.input_dim())
}

pub fn embedding_bytes_for(m: usize, d: usize, input_dim: usize) -> usize {
    3 * 4 + 8 * (m * (d + input_dim) + 1)
}
