//! One line per acceptance criterion. Runs without the test harness so the
//! lines always print and the timing checks have the machine to themselves.

mod common;
#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::time::{Duration, Instant};

use ockjl::codec::{decode, decode_detector, decode_ocsvm, encode, encode_detector, encode_ocsvm};
use ockjl::experiment::{run_experiment, ExperimentProtocol, Scenario};
use ockjl_core::eval::{auc, auc_doubled_wins, default_config, train_method, Method, TrainedModel};
use ockjl_core::gmm::default_reg;
use ockjl_core::quickshift::{
    auto_k, cluster_cores, default_neighbors, knn_log_density, KnnGraph, QsConfig,
};
use ockjl_core::synth::{synth_blobs, synth_cluster_in_cluster};
use ockjl_core::{
    fit_em, fit_kjl, fit_nystrom, quantile_bandwidth, train_ocsvm, Bandwidth, EmOptions, Matrix,
    OcsvmParams,
};
use support::Lcg;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn nystrom_oracle() -> Outcome {
    let h = Bandwidth::new(3.0).unwrap();
    let mut worst_trunc = 0.0f64;
    let mut worst_full = 0.0f64;
    for seed in 0..20u64 {
        let pts = Lcg(seed).points(40, 6);
        let x = Matrix::from_rows(&pts).unwrap();
        for d in [2, 5, 40] {
            let model = fit_nystrom(&x, 40, d, h, seed).unwrap();
            let z = model.embed(&x).unwrap();
            let oracle = support::nystrom_gram(&rows(&model.landmarks), &pts, h.get(), d);
            let full = support::gram(&pts, &pts, h.get());
            for i in 0..40 {
                for j in 0..40 {
                    let ip = dot(z.row(i), z.row(j));
                    worst_trunc = worst_trunc.max((ip - oracle[i][j]).abs());
                    if d == 40 {
                        worst_full = worst_full.max((ip - full[i][j]).abs());
                    }
                }
            }
        }
    }
    check(
        worst_trunc < 1e-8 && worst_full < 1e-6,
        format!("max |err| {worst_trunc:.2e} vs truncated oracle, {worst_full:.2e} vs full gram"),
    )
}

fn kjl_unbiased() -> Outcome {
    let pts = Lcg(7).points(12, 3);
    let x = Matrix::from_rows(&pts).unwrap();
    let (h, d) = (2.0, 10);
    let (qx, qy) = ([0.1, -0.2, 0.3], [0.2, -0.1, 0.25]);
    let k_ii = support::gram(&pts, &pts, h);
    let kx: Vec<f64> = pts.iter().map(|p| support::kernel(p, &qx, h)).collect();
    let ky: Vec<f64> = pts.iter().map(|p| support::kernel(p, &qy, h)).collect();
    let a: Vec<f64> = k_ii.iter().map(|r| dot(r, &kx)).collect();
    let b: Vec<f64> = k_ii.iter().map(|r| dot(r, &ky)).collect();
    let expected = d as f64 * dot(&a, &b);
    let mean = (0..500u64)
        .map(|seed| {
            let model = fit_kjl(&x, 12, d, Bandwidth::new(h).unwrap(), seed).unwrap();
            dot(
                &model.embed_one(&qx).unwrap(),
                &model.embed_one(&qy).unwrap(),
            )
        })
        .sum::<f64>()
        / 500.0;
    let rel = ((mean - expected) / expected).abs();
    check(
        rel < 0.05,
        format!("mean {mean:.4} vs {expected:.4}, rel err {rel:.3}"),
    )
}

fn ocsvm_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut constraints = true;
    for seed in 0..50u64 {
        let mut rng = Lcg(seed);
        let n = 2 + (rng.next_u64() % 9) as usize;
        let dim = 1 + (rng.next_u64() % 3) as usize;
        let pts = rng.points(n, dim);
        let h = 0.5 + 2.0 * rng.uniform();
        let nu = (0.1 + 0.9 * rng.uniform()).max(1.0 / n as f64);
        let x = Matrix::from_rows(&pts).unwrap();
        let fit = train_ocsvm(
            &x,
            Bandwidth::new(h).unwrap(),
            &OcsvmParams {
                nu,
                ..OcsvmParams::default()
            },
        )
        .unwrap();
        let q = support::gram(&pts, &pts, h);
        let c = 1.0 / (nu * n as f64);
        let (best, _) = support::brute_force_ocsvm_dual(&q, c);
        worst = worst.max((support::dual_objective(&q, &fit.alpha_full) - best).abs());
        let sum: f64 = fit.alpha_full.iter().sum();
        constraints &= fit.converged
            && (sum - 1.0).abs() < 1e-8
            && fit
                .alpha_full
                .iter()
                .all(|&a| (0.0..=c * (1.0 + 1e-12)).contains(&a));
    }
    let pts = Lcg(99).points(500, 2);
    let x = Matrix::from_rows(&pts).unwrap();
    let h = quantile_bandwidth(&x, 0.25).unwrap();
    let fit = train_ocsvm(
        &x,
        h,
        &OcsvmParams {
            nu: 0.2,
            ..OcsvmParams::default()
        },
    )
    .unwrap();
    let flagged = fit
        .model
        .score_batch(&x)
        .unwrap()
        .iter()
        .filter(|&&s| s < 0.0)
        .count() as f64
        / 500.0;
    let sv = fit.model.n_support() as f64 / 500.0;
    check(
        worst < 1e-5 && constraints && flagged <= 0.23 && sv >= 0.17,
        format!("max objective gap {worst:.2e}, constraints ok {constraints}, ν=0.2: flagged {flagged:.3}, SV {sv:.3}"),
    )
}

fn gmm_checks() -> Outcome {
    let mut worst_decrease = f64::NEG_INFINITY;
    for seed in 0..20u64 {
        let k = 1 + (seed % 6) as usize;
        let blobs = synth_blobs(300, 1 + (seed % 4) as usize, 3, 4.0, seed).unwrap();
        let fit = fit_em(
            &blobs.data.x,
            k,
            None,
            &EmOptions {
                seed,
                ..EmOptions::default()
            },
        )
        .unwrap();
        worst_decrease = worst_decrease.max(fit.worst_decrease());
    }
    let x = Matrix::from_rows(&Lcg(31).points(200, 4)).unwrap();
    let fit = fit_em(&x, 1, None, &EmOptions::default()).unwrap();
    worst_decrease = worst_decrease.max(fit.worst_decrease());
    let (mean, cov, reg) = (x.column_means(), x.covariance(), default_reg(&x));
    let mut closed = 0.0f64;
    for j in 0..4 {
        closed = closed.max((fit.model.means()[(0, j)] - mean[j]).abs());
        for t in 0..4 {
            let expected = cov[(j, t)] + if j == t { reg } else { 0.0 };
            closed = closed.max((fit.model.covariances()[0][(j, t)] - expected).abs());
        }
    }
    let mut recovery = 0.0f64;
    for seed in 0..5 {
        let blobs = synth_blobs(600, 2, 2, 12.0, seed).unwrap();
        let fit = fit_em(
            &blobs.data.x,
            2,
            None,
            &EmOptions {
                seed,
                ..EmOptions::default()
            },
        )
        .unwrap();
        worst_decrease = worst_decrease.max(fit.worst_decrease());
        for c in blobs.centers.iter_rows() {
            let nearest = fit
                .model
                .means()
                .iter_rows()
                .map(|m| {
                    m.iter()
                        .zip(c)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            recovery = recovery.max(nearest);
        }
    }
    check(
        worst_decrease <= 1e-9 && closed < 1e-10 && recovery < 0.3,
        format!("worst LL decrease {worst_decrease:.1e}, k=1 err {closed:.1e}, 2-blob mean err {recovery:.3}σ"),
    )
}

fn auc_oracle() -> Outcome {
    let mut mismatches = 0;
    let mut tied_sets = 0;
    for seed in 0..100u64 {
        let mut rng = Lcg(seed);
        let a = 1 + (rng.next_u64() % 60) as usize;
        let b = 1 + (rng.next_u64() % 60) as usize;
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| (rng.uniform() * 12.0).floor() - 6.0)
                .collect()
        };
        let (normal, novel) = (draw(a), draw(b));
        if normal.iter().any(|x| novel.contains(x)) {
            tied_sets += 1;
        }
        if auc_doubled_wins(&normal, &novel) != support::doubled_pair_wins(&normal, &novel)
            || auc(&normal, &novel).unwrap() != support::brute_auc(&normal, &novel)
        {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("{mismatches}/100 mismatches ({tied_sets} sets with cross ties)"),
    )
}

fn quickshift_checks() -> Outcome {
    let mut hits = 0;
    let mut monotone = true;
    for seed in 0..20u64 {
        let x = synth_blobs(900, 3, 2, 10.0, seed).unwrap().data.x;
        if auto_k(&x, &QsConfig::default()).unwrap().k == 3 {
            hits += 1;
        }
        let graph = KnnGraph::build(&x, default_neighbors(x.rows())).unwrap();
        let dens = knn_log_density(&graph, x.cols()).unwrap();
        let counts: Vec<usize> = [0.5, 0.9, 0.99]
            .iter()
            .map(|&b| cluster_cores(&graph, &dens, b).unwrap().len())
            .collect();
        monotone &= counts.windows(2).all(|w| w[0] >= w[1]);
    }
    check(
        hits >= 19 && monotone,
        format!("k=3 on {hits}/20 seeds, cores non-increasing in β: {monotone}"),
    )
}

fn detection_quality() -> Outcome {
    let data = synth_cluster_in_cluster(6000, 17).unwrap();
    let protocol = ExperimentProtocol {
        n_train: 2500,
        timing_repeats: 1,
        ..ExperimentProtocol::default()
    };
    let methods = [Method::Ocsvm, Method::KjlQs, Method::NystromQs];
    let report = run_experiment(
        &data.class(0),
        &data.class(1),
        &methods,
        &protocol,
        Scenario::Tuned,
    )
    .unwrap();
    let svm_auc = report.methods[0].auc.mean;
    let kjl = report.methods[1].ratios.as_ref().unwrap().auc_retained.mean;
    let nys = report.methods[2].ratios.as_ref().unwrap().auc_retained.mean;
    check(
        svm_auc >= 0.95 && kjl >= 0.95 && nys >= 0.95,
        format!("OCSVM AUC {svm_auc:.4}, retained: KJL-QS {kjl:.4}, Nyström-QS {nys:.4}"),
    )
}

/// Fastest of several batch-scoring runs.
fn scoring_time(model: &TrainedModel, x: &Matrix, runs: usize) -> Duration {
    (0..runs)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(model.score_batch(x).unwrap());
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn efficiency_data() -> (Matrix, Matrix) {
    let blobs = synth_blobs(6000, 5, 20, 8.0, 23).unwrap().data.x;
    let train = blobs.select_rows(&(0..5000).collect::<Vec<_>>());
    let test = blobs.select_rows(&(5000..6000).collect::<Vec<_>>());
    (train, test)
}

fn efficiency(train: &Matrix, test: &Matrix) -> Outcome {
    let svm = train_method(&default_config(Method::Ocsvm), train, None).unwrap();
    let det = train_method(&default_config(Method::KjlQs), train, None).unwrap();
    let (TrainedModel::Ocsvm(s), TrainedModel::Detector(d)) = (&svm, &det) else {
        unreachable!()
    };
    let n_sv = s.n_support();
    let k = d.gmm.k();
    let t_svm = scoring_time(&svm, test, 5);
    let t_det = scoring_time(&det, test, 5);
    let speedup = t_svm.as_secs_f64() / t_det.as_secs_f64();
    let space = encode(&svm).len() as f64 / encode(&det).len() as f64;
    check(
        speedup >= 5.0 && space >= 10.0 && n_sv >= 2000 && k <= 20,
        format!("scoring speedup {speedup:.1}×, space reduction {space:.1}×, ñ {n_sv}, k {k}"),
    )
}

fn scaling(train: &Matrix, probe: &Matrix) -> Outcome {
    let half = train.select_rows(&(0..2500).collect::<Vec<_>>());
    let mut lines = Vec::new();
    let mut ok = true;
    for method in [Method::Ocsvm, Method::KjlQs, Method::NystromQs] {
        let small = train_method(&default_config(method), &half, None).unwrap();
        let large = train_method(&default_config(method), train, None).unwrap();
        // alternate the two so clock-speed drift hits both alike
        let (mut t_small, mut t_large) = (Duration::MAX, Duration::MAX);
        for _ in 0..15 {
            t_small = t_small.min(scoring_time(&small, probe, 1));
            t_large = t_large.min(scoring_time(&large, probe, 1));
        }
        let growth = t_large.as_secs_f64() / t_small.as_secs_f64() - 1.0;
        ok &= match method {
            Method::Ocsvm => growth >= 0.5,
            _ => growth.abs() < 0.2,
        };
        let k = match &large {
            TrainedModel::Detector(d) => format!(" (k {})", d.gmm.k()),
            TrainedModel::Ocsvm(_) => String::new(),
        };
        lines.push(format!("{} {:+.0}%{k}", method.name(), 100.0 * growth));
    }
    check(
        ok,
        format!("scoring time change 2500→5000: {}", lines.join(", ")),
    )
}

fn serialization() -> Outcome {
    let mut failures = 0;
    for seed in 0..100u64 {
        let det = common::random_detector(seed);
        let bytes = encode_detector(&det);
        let back = decode_detector(&bytes).unwrap();
        if back != det
            || encode_detector(&back) != bytes
            || bytes.len() != common::detector_file_len(&det)
        {
            failures += 1;
        }
        let svm = common::random_ocsvm(seed);
        let bytes = encode_ocsvm(&svm);
        let back = decode_ocsvm(&bytes).unwrap();
        if back != svm
            || encode_ocsvm(&back) != bytes
            || bytes.len() != common::ocsvm_file_len(&svm)
        {
            failures += 1;
        }
    }
    let x = synth_blobs(400, 3, 4, 6.0, 2).unwrap().data.x;
    for method in Method::ALL {
        let model = train_method(&default_config(method), &x, None).unwrap();
        let bytes = encode(&model);
        if decode(&bytes).unwrap() != model || bytes.len() != model.model_bytes() {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!("{failures} failures over 200 random and 5 trained models"),
    )
}

fn main() {
    let (train, test) = efficiency_data();
    let probe = test.vstack(&train).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("1 Nyström oracle", Box::new(nystrom_oracle)),
        ("2 KJL unbiasedness", Box::new(kjl_unbiased)),
        ("3 OCSVM oracle and ν-property", Box::new(ocsvm_oracle)),
        ("4 GMM EM", Box::new(gmm_checks)),
        ("5 AUC oracle", Box::new(auc_oracle)),
        ("6 Quickshift++ k and β", Box::new(quickshift_checks)),
        ("7 detection quality", Box::new(detection_quality)),
        ("8 efficiency", Box::new(|| efficiency(&train, &test))),
        (
            "9 scoring cost scaling",
            Box::new(|| scaling(&train, &probe)),
        ),
        ("10 serialization", Box::new(serialization)),
    ];
    let mut failed = Vec::new();
    for (name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                println!("[FAIL] {name}: {detail} ({secs:.1}s)");
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
