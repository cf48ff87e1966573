//! OC-Nyström / OC-KJL detectors: embed, pick `k`, fit a mixture, score by
//! log-density, and flag points that fall below a threshold.

use alloc::vec::Vec;

use crate::embedding::{embedding_bytes, fit_kjl, fit_nystrom, EmbeddingKind, EmbeddingModel};
use crate::error::{Error, Result};
use crate::gmm::{fit_em, gmm_bytes, EmOptions, GmmFit, GmmModel};
use crate::kernel::{quantile_bandwidth, Bandwidth};
use crate::matrix::Matrix;
use crate::quickshift::{auto_k, QsConfig};
use crate::stats::nearest_rank;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthChoice {
    Explicit(Bandwidth),
    /// Nearest-rank quantile of training pairwise distances.
    Quantile(f64),
}

impl BandwidthChoice {
    pub fn resolve(self, x: &Matrix) -> Result<Bandwidth> {
        match self {
            BandwidthChoice::Explicit(h) => Ok(h),
            BandwidthChoice::Quantile(q) => quantile_bandwidth(x, q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    Fixed(usize),
    AutoQs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub kind: EmbeddingKind,
    pub m: usize,
    pub d: usize,
    pub bandwidth: BandwidthChoice,
    pub k_mode: KMode,
    pub qs: QsConfig,
    pub em: EmOptions,
    pub seed: u64,
}

impl DetectorConfig {
    /// `m = 100`, `d = 5`, bandwidth at the 0.25 distance quantile, `k` by mode seeking.
    pub fn new(kind: EmbeddingKind) -> Self {
        Self {
            kind,
            m: 100,
            d: 5,
            bandwidth: BandwidthChoice::Quantile(0.25),
            k_mode: KMode::AutoQs,
            qs: QsConfig::default(),
            em: EmOptions::default(),
            seed: 0,
        }
    }
}

/// Projection plus mixture; `threshold` is in log-density units.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub embedding: EmbeddingModel,
    pub gmm: GmmModel,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Normal,
    Novel,
}

/// Training output with the intermediate choices kept for inspection.
#[derive(Debug, Clone)]
pub struct DetectorFit {
    pub model: DetectorModel,
    pub bandwidth: Bandwidth,
    pub k: usize,
    pub em: GmmFit,
}

pub fn train_detector(x: &Matrix, config: &DetectorConfig) -> Result<DetectorFit> {
    if x.rows() < config.m {
        return Err(Error::TooFewPoints {
            needed: config.m,
            got: x.rows(),
        });
    }
    let h = config.bandwidth.resolve(x)?;
    let embedding = match config.kind {
        EmbeddingKind::Nystrom => fit_nystrom(x, config.m, config.d, h, config.seed)?,
        EmbeddingKind::Kjl => fit_kjl(x, config.m, config.d, h, config.seed)?,
    };
    let z = embedding.embed(x)?;
    let em_opts = EmOptions {
        seed: config.seed,
        ..config.em
    };
    let em = match config.k_mode {
        KMode::Fixed(k) => fit_em(&z, k, None, &em_opts)?,
        KMode::AutoQs => {
            let found = auto_k(&z, &config.qs)?;
            fit_em(&z, found.k, Some(found.init), &em_opts)?
        }
    };
    Ok(DetectorFit {
        k: em.model.k(),
        model: DetectorModel {
            embedding,
            gmm: em.model.clone(),
            threshold: None,
        },
        bandwidth: h,
        em,
    })
}

impl DetectorModel {
    pub fn input_dim(&self) -> usize {
        self.embedding.input_dim()
    }

    /// `ln f(φ'(x))`; higher means more normal.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let z = self.embedding.embed_one(x)?;
        self.gmm.log_pdf(&z)
    }

    /// Scores every row, reusing buffers across rows.
    pub fn score_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.cols(),
            });
        }
        let mut kvec = alloc::vec![0.0; self.embedding.m()];
        let mut z = alloc::vec![0.0; self.embedding.d()];
        let mut scratch = alloc::vec![0.0; self.gmm.dim()];
        let mut terms = alloc::vec![0.0; self.gmm.k()];
        let mut out = Vec::with_capacity(x.rows());
        for row in x.iter_rows() {
            self.embedding.embed_into(row, &mut kvec, &mut z)?;
            out.push(self.gmm.log_pdf_with(&z, &mut scratch, &mut terms));
        }
        Ok(out)
    }

    /// Sets the threshold so at most `target_fpr` of `normals` are flagged.
    pub fn calibrate(&mut self, normals: &Matrix, target_fpr: f64) -> Result<f64> {
        let scores = self.score_batch(normals)?;
        let t = choose_threshold(&scores, target_fpr)?;
        self.threshold = Some(t);
        Ok(t)
    }

    pub fn classify(&self, x: &[f64]) -> Result<Verdict> {
        let t = self.threshold.ok_or(Error::MissingThreshold)?;
        Ok(verdict(self.score(x)?, t))
    }
}

/// Novel iff `score < threshold`.
#[inline]
pub fn verdict(score: f64, threshold: f64) -> Verdict {
    if score < threshold {
        Verdict::Novel
    } else {
        Verdict::Normal
    }
}

/// Nearest-rank `target_fpr` quantile of ascending `scores`: at most that
/// fraction of them lies strictly below the returned value.
pub fn choose_threshold(scores: &[f64], target_fpr: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("no normal scores to calibrate on"));
    }
    if !(0.0..=1.0).contains(&target_fpr) {
        return Err(Error::InvalidParameter(
            "target false-positive rate must lie in [0, 1]",
        ));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[nearest_rank(target_fpr, sorted.len()) - 1])
}

/// Magic, version and embedding-kind bytes.
pub const DETECTOR_PREAMBLE_BYTES: usize = 4 + 1 + 1;

/// Exact size of the serialized detector file.
pub fn detector_bytes(model: &DetectorModel) -> usize {
    DETECTOR_PREAMBLE_BYTES
        + embedding_bytes(&model.embedding)
        + gmm_bytes(&model.gmm)
        + if model.threshold.is_some() { 8 } else { 0 }
}
