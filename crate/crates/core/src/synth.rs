//! Seeded synthetic datasets for tests and benchmarks.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::seeded_rng;

/// Points with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub x: Matrix,
    pub labels: Vec<usize>,
}

impl LabeledData {
    /// Rows whose label equals `label`, in original order.
    pub fn class(&self, label: usize) -> Matrix {
        let idx: Vec<usize> = (0..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect();
        self.x.select_rows(&idx)
    }
}

pub const RING_RADIUS: f64 = 3.0;
pub const RING_NOISE: f64 = 0.3;
pub const CORE_SIGMA: f64 = 0.5;

/// "Cluster in cluster": label 0 is a ring of radius 3 with radial noise
/// σ = 0.3, label 1 an isotropic Gaussian at the origin with σ = 0.5. The
/// first `⌈n/2⌉` rows are the ring.
pub fn synth_cluster_in_cluster(n: usize, seed: u64) -> Result<LabeledData> {
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut rng = seeded_rng(seed);
    let radial = Normal::new(RING_RADIUS, RING_NOISE).expect("valid normal");
    let n_ring = n.div_ceil(2);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n_ring {
        let angle = rng.random::<f64>() * 2.0 * PI;
        let r = radial.sample(&mut rng);
        data.push(r * angle.cos());
        data.push(r * angle.sin());
        labels.push(0);
    }
    for _ in n_ring..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        data.push(CORE_SIGMA * a);
        data.push(CORE_SIGMA * b);
        labels.push(1);
    }
    Ok(LabeledData {
        x: Matrix::from_vec(n, 2, data)?,
        labels,
    })
}

/// Blob data together with the generating centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub data: LabeledData,
    pub centers: Matrix,
}

/// `k` unit-variance isotropic Gaussians in `ℝᵈ` with centers pairwise at
/// least `separation` apart; sizes differ by at most one.
pub fn synth_blobs(n: usize, k: usize, d: usize, separation: f64, seed: u64) -> Result<Blobs> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParameter("blobs need k ≥ 1 and d ≥ 1"));
    }
    let mut rng = seeded_rng(seed);
    let half_width = separation * (k as f64).powf(1.0 / d as f64).max(1.0);
    let mut centers = Matrix::zeros(k, d);
    for c in 0..k {
        let mut placed = false;
        for _ in 0..10_000 {
            for v in centers.row_mut(c) {
                *v = (rng.random::<f64>() * 2.0 - 1.0) * half_width;
            }
            let far = (0..c)
                .all(|o| squared_distance(centers.row(c), centers.row(o)).sqrt() >= separation);
            if far {
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Degenerate(
                "could not place blob centers at the requested separation",
            ));
        }
    }
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i * k / n.max(1);
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            data.push(centers[(c, j)] + noise);
        }
        labels.push(c);
    }
    Ok(Blobs {
        data: LabeledData {
            x: Matrix::from_vec(n, d, data)?,
            labels,
        },
        centers,
    })
}
