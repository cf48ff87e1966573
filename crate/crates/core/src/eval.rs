//! Detection-quality metrics, method configuration and validation-set tuning.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::detector::{
    detector_bytes, train_detector, BandwidthChoice, DetectorConfig, DetectorModel, KMode,
};
use crate::embedding::EmbeddingKind;
use crate::error::{Error, Result};
use crate::kernel::{pairwise_distances, quantile_bandwidth_sorted, Bandwidth};
use crate::matrix::Matrix;
use crate::ocsvm::{ocsvm_bytes, train_ocsvm, OcsvmModel, OcsvmParams};
use crate::quickshift::K_GRID;

/// Twice the Mann–Whitney count: `2·#{normal > novel} + #{ties}`, computed
/// from mid-ranks in integer arithmetic.
pub fn auc_doubled_wins(normal: &[f64], novel: &[f64]) -> u64 {
    let mut all: Vec<(f64, bool)> = Vec::with_capacity(normal.len() + novel.len());
    all.extend(normal.iter().map(|&s| (s, true)));
    all.extend(novel.iter().map(|&s| (s, false)));
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // doubled 1-based mid-rank of a tie block [start, end) is start + 1 + end
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].0 == all[start].0 {
            end += 1;
        }
        let normals_in_block = all[start..end].iter().filter(|e| e.1).count() as u64;
        doubled_rank_sum += normals_in_block * (start + 1 + end) as u64;
        start = end;
    }
    let n1 = normal.len() as u64;
    doubled_rank_sum - n1 * (n1 + 1)
}

/// Probability that a normal score exceeds a novel one, ties counted half.
/// Equals the ROC area when points are flagged novel iff `score < t`.
pub fn auc(scores_normal: &[f64], scores_novel: &[f64]) -> Result<f64> {
    if scores_normal.is_empty() || scores_novel.is_empty() {
        return Err(Error::Empty("AUC needs scores on both sides"));
    }
    let pairs = 2 * scores_normal.len() as u64 * scores_novel.len() as u64;
    Ok(auc_doubled_wins(scores_normal, scores_novel) as f64 / pairs as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ocsvm,
    Nystrom,
    NystromQs,
    Kjl,
    KjlQs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ocsvm,
        Method::Nystrom,
        Method::NystromQs,
        Method::Kjl,
        Method::KjlQs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ocsvm => "ocsvm",
            Method::Nystrom => "nystrom",
            Method::NystromQs => "nystrom-qs",
            Method::Kjl => "kjl",
            Method::KjlQs => "kjl-qs",
        }
    }

    pub fn embedding(self) -> Option<EmbeddingKind> {
        match self {
            Method::Ocsvm => None,
            Method::Nystrom | Method::NystromQs => Some(EmbeddingKind::Nystrom),
            Method::Kjl | Method::KjlQs => Some(EmbeddingKind::Kjl),
        }
    }

    /// Whether `k` comes from mode seeking rather than a grid.
    pub fn uses_quickshift(self) -> bool {
        matches!(self, Method::NystromQs | Method::KjlQs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(Error::InvalidParameter("unknown method"))
    }
}

/// Everything needed to train one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub h_quantile: f64,
    pub k_mode: KMode,
    pub m: usize,
    pub d: usize,
    pub nu: f64,
    pub seed: u64,
}

/// Rule-of-thumb configuration: bandwidth at the 0.25 distance quantile and
/// `k` from mode seeking.
pub fn default_config(method: Method) -> MethodConfig {
    MethodConfig {
        method,
        h_quantile: 0.25,
        k_mode: KMode::AutoQs,
        m: 100,
        d: 5,
        nu: OcsvmParams::default().nu,
        seed: 0,
    }
}

impl MethodConfig {
    pub fn detector_config(&self, h: Bandwidth) -> Option<DetectorConfig> {
        let kind = self.method.embedding()?;
        Some(DetectorConfig {
            bandwidth: BandwidthChoice::Explicit(h),
            k_mode: self.k_mode,
            seed: self.seed,
            m: self.m,
            d: self.d,
            ..DetectorConfig::new(kind)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Detector(DetectorModel),
    Ocsvm(OcsvmModel),
}

impl TrainedModel {
    /// Higher is more normal for both model families.
    pub fn score_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            TrainedModel::Detector(m) => m.score_batch(x),
            TrainedModel::Ocsvm(m) => m.score_batch(x),
        }
    }

    pub fn model_bytes(&self) -> usize {
        match self {
            TrainedModel::Detector(m) => detector_bytes(m),
            TrainedModel::Ocsvm(m) => ocsvm_bytes(m),
        }
    }
}

/// Trains `config` on `x`. `sorted_distances`, when given, must be
/// `pairwise_distances(x)` and saves recomputing it.
pub fn train_method(
    config: &MethodConfig,
    x: &Matrix,
    sorted_distances: Option<&[f64]>,
) -> Result<TrainedModel> {
    let h = match sorted_distances {
        Some(d) => quantile_bandwidth_sorted(d, config.h_quantile)?,
        None => crate::kernel::quantile_bandwidth(x, config.h_quantile)?,
    };
    match config.detector_config(h) {
        Some(dc) => Ok(TrainedModel::Detector(train_detector(x, &dc)?.model)),
        None => {
            let params = OcsvmParams {
                nu: config.nu,
                ..OcsvmParams::default()
            };
            Ok(TrainedModel::Ocsvm(train_ocsvm(x, h, &params)?.model))
        }
    }
}

/// Hyperparameter grid for minimal tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    pub h_quantiles: Vec<f64>,
    /// Only used by methods with a fixed `k`.
    pub k_values: Vec<usize>,
}

impl Default for TuningGrid {
    /// `{0.1, …, 0.9, 0.95}` bandwidth quantiles and `{1, 4, 6, …, 20}` components.
    fn default() -> Self {
        let mut h_quantiles: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        h_quantiles.push(0.95);
        Self {
            h_quantiles,
            k_values: K_GRID.to_vec(),
        }
    }
}

impl TuningGrid {
    /// Configurations tried for `base.method`, ordered by quantile then `k`.
    pub fn candidates(&self, base: &MethodConfig) -> Vec<MethodConfig> {
        let mut qs = self.h_quantiles.clone();
        qs.sort_by(f64::total_cmp);
        let mut ks = self.k_values.clone();
        ks.sort_unstable();
        let mut out = Vec::new();
        for &q in &qs {
            let with_q = MethodConfig {
                h_quantile: q,
                ..*base
            };
            if base.method.embedding().is_some() && !base.method.uses_quickshift() {
                out.extend(ks.iter().map(|&k| MethodConfig {
                    k_mode: KMode::Fixed(k),
                    ..with_q
                }));
            } else {
                out.push(MethodConfig {
                    k_mode: KMode::AutoQs,
                    ..with_q
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: MethodConfig,
    pub best_auc: f64,
    /// Validation AUC of every candidate, in grid order.
    pub evaluated: Vec<(MethodConfig, f64)>,
}

/// Trains every grid point and keeps the one with the highest validation AUC;
/// ties go to the smaller quantile, then the smaller `k`.
pub fn tune_minimal(
    train: &Matrix,
    val_normal: &Matrix,
    val_novel: &Matrix,
    base: &MethodConfig,
    grid: &TuningGrid,
) -> Result<TuneResult> {
    let candidates = grid.candidates(base);
    if candidates.is_empty() {
        return Err(Error::Empty("empty tuning grid"));
    }
    let distances = pairwise_distances(train)?;
    let mut evaluated = Vec::with_capacity(candidates.len());
    let mut best: Option<(MethodConfig, f64)> = None;
    for cfg in candidates {
        let model = train_method(&cfg, train, Some(&distances))?;
        let a = auc(
            &model.score_batch(val_normal)?,
            &model.score_batch(val_novel)?,
        )?;
        evaluated.push((cfg, a));
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((cfg, a));
        }
    }
    let (best, best_auc) = best.expect("at least one candidate");
    Ok(TuneResult {
        best,
        best_auc,
        evaluated,
    })
}
