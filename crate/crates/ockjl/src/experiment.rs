//! Repeated train/score benchmark over a normal and a novel pool.

use std::time::Instant;

use ockjl_core::eval::{
    auc, default_config, train_method, tune_minimal, Method, MethodConfig, TrainedModel, TuningGrid,
};
use ockjl_core::stats::mean_std;
use ockjl_core::{seeded_rng, KMode, Matrix};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentProtocol {
    pub n_train: usize,
    pub n_test_per_class: usize,
    /// Split evenly between normal and novel points.
    pub n_val: usize,
    pub reps: usize,
    pub timing_repeats: usize,
    pub seed: u64,
}

impl Default for ExperimentProtocol {
    fn default() -> Self {
        Self {
            n_train: 5000,
            n_test_per_class: 300,
            n_val: 150,
            reps: 5,
            timing_repeats: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Bandwidth (and `k` for fixed-k methods) picked by validation AUC.
    Tuned,
    /// Rule-of-thumb settings, no validation data.
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub auc: f64,
    pub train_ms: f64,
    /// Mean wall time of one pass over the whole test set.
    pub test_ms: f64,
    pub model_bytes: usize,
    pub h_quantile: f64,
    /// Mixture components, for detectors.
    pub k: Option<usize>,
    /// Support vectors, for OCSVM.
    pub n_support: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub auc_retained: Stat,
    pub train_speedup: Stat,
    pub test_speedup: Stat,
    pub space_reduction: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub auc: Stat,
    pub train_ms_per_100: Stat,
    pub test_ms_per_100: Stat,
    pub model_bytes: Stat,
    /// Against the OCSVM mean, when OCSVM was run.
    pub ratios: Option<Ratios>,
    pub reps: Vec<RepResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario: Scenario,
    pub protocol: ExperimentProtocol,
    /// Scoring runs on a single thread.
    pub threads: usize,
    pub methods: Vec<MethodReport>,
}

/// Disjoint train / validation / test draws for every repetition.
struct Splits {
    test_normal: Matrix,
    test_novel: Matrix,
    rest_normal: Vec<usize>,
    rest_novel: Vec<usize>,
}

fn split_pools(
    normal: &Matrix,
    novel: &Matrix,
    p: &ExperimentProtocol,
    scenario: Scenario,
) -> Result<Splits> {
    let val_normal = if scenario == Scenario::Tuned {
        p.n_val / 2
    } else {
        0
    };
    let val_novel = if scenario == Scenario::Tuned {
        p.n_val - p.n_val / 2
    } else {
        0
    };
    let need_normal = p.n_test_per_class + p.n_train + val_normal;
    let need_novel = p.n_test_per_class + val_novel;
    if normal.rows() < need_normal || novel.rows() < need_novel {
        return Err(Error::Experiment(format!(
            "pools too small: need {need_normal} normal and {need_novel} novel, have {} and {}",
            normal.rows(),
            novel.rows()
        )));
    }
    if p.reps == 0 || p.timing_repeats == 0 || p.n_test_per_class == 0 {
        return Err(Error::Experiment(
            "reps, timing_repeats and n_test_per_class must be positive".into(),
        ));
    }
    let mut rng = seeded_rng(p.seed);
    let mut n_idx: Vec<usize> = (0..normal.rows()).collect();
    let mut v_idx: Vec<usize> = (0..novel.rows()).collect();
    n_idx.shuffle(&mut rng);
    v_idx.shuffle(&mut rng);
    let t = p.n_test_per_class;
    Ok(Splits {
        test_normal: normal.select_rows(&n_idx[..t]),
        test_novel: novel.select_rows(&v_idx[..t]),
        rest_normal: n_idx[t..].to_vec(),
        rest_novel: v_idx[t..].to_vec(),
    })
}

fn k_of(model: &TrainedModel) -> (Option<usize>, Option<usize>) {
    match model {
        TrainedModel::Detector(d) => (Some(d.gmm.k()), None),
        TrainedModel::Ocsvm(o) => (None, Some(o.n_support())),
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs every method on every repetition and summarizes.
pub fn run_experiment(
    normal_pool: &Matrix,
    novel_pool: &Matrix,
    methods: &[Method],
    protocol: &ExperimentProtocol,
    scenario: Scenario,
) -> Result<EvalReport> {
    let p = protocol;
    let splits = split_pools(normal_pool, novel_pool, p, scenario)?;
    let test = splits.test_normal.vstack(&splits.test_novel)?;
    let n_test = test.rows();
    let mut per_method: Vec<Vec<RepResult>> = vec![Vec::with_capacity(p.reps); methods.len()];

    for rep in 0..p.reps {
        let mut rng = seeded_rng(p.seed.wrapping_add(1 + rep as u64));
        let mut rn = splits.rest_normal.clone();
        let mut rv = splits.rest_novel.clone();
        rn.shuffle(&mut rng);
        rv.shuffle(&mut rng);
        let train = normal_pool.select_rows(&rn[..p.n_train]);
        let val_normal = normal_pool.select_rows(&rn[p.n_train..p.n_train + p.n_val / 2]);
        let val_novel = novel_pool.select_rows(&rv[..p.n_val - p.n_val / 2]);

        let mut rep_models: Vec<TrainedModel> = Vec::with_capacity(methods.len());
        for (mi, &method) in methods.iter().enumerate() {
            let base = MethodConfig {
                seed: p.seed.wrapping_add(rep as u64),
                ..default_config(method)
            };
            let cfg = match scenario {
                Scenario::Default => base,
                Scenario::Tuned => {
                    tune_minimal(
                        &train,
                        &val_normal,
                        &val_novel,
                        &base,
                        &TuningGrid::default(),
                    )?
                    .best
                }
            };
            let start = Instant::now();
            let model = train_method(&cfg, &train, None)?;
            let train_ms = ms(start);
            let bytes = codec::encode(&model).len();
            debug_assert_eq!(bytes, model.model_bytes());

            let mut scores = Vec::new();
            let start = Instant::now();
            for _ in 0..p.timing_repeats {
                scores = model.score_batch(&test)?;
            }
            let test_ms = ms(start) / p.timing_repeats as f64;
            let (normal_scores, novel_scores) = scores.split_at(p.n_test_per_class);
            let (k, n_support) = k_of(&model);
            per_method[mi].push(RepResult {
                auc: auc(normal_scores, novel_scores)?,
                train_ms,
                test_ms,
                model_bytes: bytes,
                h_quantile: cfg.h_quantile,
                k: k.or(match cfg.k_mode {
                    KMode::Fixed(k) => Some(k),
                    KMode::AutoQs => None,
                }),
                n_support,
            });
            rep_models.push(model);
        }
        check_space_ordering(&rep_models, train.cols())?;
    }

    let per_100 = |v: f64, n: usize| v * 100.0 / n as f64;
    let baseline = methods.iter().position(|&m| m == Method::Ocsvm).map(|i| {
        let r = &per_method[i];
        (
            Stat::of(&r.iter().map(|x| x.auc).collect::<Vec<_>>()).mean,
            Stat::of(&r.iter().map(|x| x.train_ms).collect::<Vec<_>>()).mean,
            Stat::of(&r.iter().map(|x| x.test_ms).collect::<Vec<_>>()).mean,
            Stat::of(&r.iter().map(|x| x.model_bytes as f64).collect::<Vec<_>>()).mean,
        )
    });
    let methods = methods
        .iter()
        .zip(per_method)
        .map(|(m, reps)| {
            let col = |f: &dyn Fn(&RepResult) -> f64| reps.iter().map(f).collect::<Vec<f64>>();
            let ratios = baseline.map(|(auc0, train0, test0, bytes0)| Ratios {
                auc_retained: Stat::of(&col(&|r| r.auc / auc0)),
                train_speedup: Stat::of(&col(&|r| train0 / r.train_ms)),
                test_speedup: Stat::of(&col(&|r| test0 / r.test_ms)),
                space_reduction: Stat::of(&col(&|r| bytes0 / r.model_bytes as f64)),
            });
            MethodReport {
                method: m.name().to_string(),
                auc: Stat::of(&col(&|r| r.auc)),
                train_ms_per_100: Stat::of(&col(&|r| per_100(r.train_ms, p.n_train))),
                test_ms_per_100: Stat::of(&col(&|r| per_100(r.test_ms, n_test))),
                model_bytes: Stat::of(&col(&|r| r.model_bytes as f64)),
                ratios,
                reps,
            }
        })
        .collect();
    Ok(EvalReport {
        scenario,
        protocol: *p,
        threads: 1,
        methods,
    })
}

/// A detector must be smaller than an OCSVM whenever the support-vector payload
/// `ñ·(D+1)` exceeds the detector payload `m·(D+d) + k·(1+d+d²)`.
fn check_space_ordering(models: &[TrainedModel], dim: usize) -> Result<()> {
    for a in models {
        let TrainedModel::Ocsvm(svm) = a else {
            continue;
        };
        for b in models {
            let TrainedModel::Detector(det) = b else {
                continue;
            };
            let (m, d, k) = (det.embedding.m(), det.embedding.d(), det.gmm.k());
            let svm_payload = svm.n_support() * (dim + 1);
            let det_payload = m * (dim + d) + k * (1 + d + d * d);
            if svm_payload > det_payload && a.model_bytes() <= b.model_bytes() {
                return Err(Error::Experiment(format!(
                    "space ordering violated: detector {} bytes vs OCSVM {} bytes",
                    b.model_bytes(),
                    a.model_bytes()
                )));
            }
        }
    }
    Ok(())
}
