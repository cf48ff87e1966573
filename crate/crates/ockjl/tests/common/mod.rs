#![allow(dead_code)]

use ockjl_core::{
    Bandwidth, DetectorModel, EmbeddingKind, EmbeddingModel, GmmModel, Matrix, OcsvmModel,
};

/// SplitMix64, independent of the crate's generator.
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(
            rows,
            cols,
            (0..rows * cols)
                .map(|_| 4.0 * self.uniform() - 2.0)
                .collect(),
        )
        .unwrap()
    }
}

pub fn random_detector(seed: u64) -> DetectorModel {
    let mut r = Mix(seed);
    let m = 1 + r.below(12);
    let d = 1 + r.below(m.min(5));
    let dim = 1 + r.below(8);
    let k = 1 + r.below(4);
    let kind = if r.below(2) == 0 {
        EmbeddingKind::Nystrom
    } else {
        EmbeddingKind::Kjl
    };
    let embedding = EmbeddingModel::new(
        kind,
        r.matrix(m, dim),
        r.matrix(d, m),
        Bandwidth::new(0.1 + r.uniform()).unwrap(),
    )
    .unwrap();
    let raw: Vec<f64> = (0..k).map(|_| 0.1 + r.uniform()).collect();
    let total: f64 = raw.iter().sum();
    let covariances = (0..k)
        .map(|_| {
            let a = r.matrix(d, d);
            let mut c = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    c[(i, j)] = (0..d).map(|t| a[(i, t)] * a[(j, t)]).sum::<f64>()
                        + if i == j { 0.1 } else { 0.0 };
                }
            }
            c
        })
        .collect();
    let gmm = GmmModel::new(
        raw.iter().map(|w| w / total).collect(),
        r.matrix(k, d),
        covariances,
    )
    .unwrap();
    let threshold = (r.below(2) == 0).then(|| -10.0 * r.uniform());
    DetectorModel {
        embedding,
        gmm,
        threshold,
    }
}

pub fn random_ocsvm(seed: u64) -> OcsvmModel {
    let mut r = Mix(seed);
    let n = 1 + r.below(30);
    let dim = 1 + r.below(8);
    OcsvmModel {
        support_vectors: r.matrix(n, dim),
        alpha: (0..n).map(|_| r.uniform()).collect(),
        rho: r.uniform(),
        bandwidth: Bandwidth::new(0.1 + r.uniform()).unwrap(),
    }
}

/// `22 + 8·(m·(D+d) + 1 + k·(1+d+d²) + [threshold])`.
pub fn detector_file_len(model: &DetectorModel) -> usize {
    let (m, d, dim, k) = (
        model.embedding.m(),
        model.embedding.d(),
        model.embedding.input_dim(),
        model.gmm.k(),
    );
    22 + 8 * (m * (dim + d) + 1 + k * (1 + d + d * d) + usize::from(model.threshold.is_some()))
}

/// `13 + 8·(ñ·(D+1) + 2)`.
pub fn ocsvm_file_len(model: &OcsvmModel) -> usize {
    13 + 8 * (model.n_support() * (model.input_dim() + 1) + 2)
}
