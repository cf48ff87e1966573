use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ockjl::codec;
use ockjl::experiment::{run_experiment, ExperimentProtocol, Scenario};
use ockjl::features_csv::{parse_features_csv, write_features_csv, FeatureTable};
use ockjl::packet_csv::parse_packet_csv;
use ockjl::pcap::parse_pcap;
use ockjl::report;
use ockjl_core::detector::verdict;
use ockjl_core::eval::{default_config, train_method, Method, MethodConfig, TrainedModel};
use ockjl_core::flow::{
    assemble_flows, iat_size_features, samp_size_features, stats_header_features, truncate_flows,
};
use ockjl_core::synth::{synth_blobs, synth_cluster_in_cluster};
use ockjl_core::{choose_threshold, KMode, Matrix, Verdict};

#[derive(Parser)]
#[command(
    name = "ockjl",
    version,
    about = "One-class novelty detection on network flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureArg {
    IatSize,
    StatsHeader,
    SampSize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Kjl,
    Nystrom,
    Ocsvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Ring of normals around a Gaussian core of novelties.
    Cic,
    Blobs,
}

#[derive(Subcommand)]
enum Command {
    /// Turn packets (CSV or classic pcap) into a flow feature table.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        feature: FeatureArg,
        /// Duration quantile that sets the SAMP-SIZE interval.
        #[arg(long, default_value_t = 0.9)]
        samp_q: f64,
        /// Flow duration quantile used for truncation.
        #[arg(long, default_value_t = 0.9)]
        trunc_q: f64,
        /// Adds a label column with this value on every row.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a detector or the OCSVM baseline on normal feature rows.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 0.25)]
        h_quantile: f64,
        /// `auto` for mode seeking, or a fixed component count.
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Detector threshold stored in the model, as a training false-positive rate.
        #[arg(long, default_value_t = 0.05)]
        threshold_fpr: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score feature rows and flag novelties.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Recompute the threshold on these normal rows at `--threshold-fpr`.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        threshold_fpr: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark methods against each other on a normal and a novel pool.
    Evaluate {
        #[arg(long)]
        normal: PathBuf,
        #[arg(long)]
        novel: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ocsvm,kjl-qs,nystrom-qs")]
        methods: Vec<Method>,
        #[arg(long, value_enum, default_value = "tuned")]
        scenario: Scenario,
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
    /// Write synthetic feature tables.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Blob count.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Blob dimension.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Minimum distance between blob centers.
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        /// Labeled table with every point.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ring points only (cic).
        #[arg(long)]
        out_normal: Option<PathBuf>,
        /// Core points only (cic).
        #[arg(long)]
        out_novel: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_features(path: &Path) -> Result<FeatureTable> {
    parse_features_csv(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn featurize(
    input: &Path,
    feature: FeatureArg,
    samp_q: f64,
    trunc_q: f64,
    label: Option<String>,
) -> Result<FeatureTable> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let is_pcap = bytes.len() >= 4
        && matches!(
            bytes[..4],
            [0xd4, 0xc3, 0xb2, 0xa1]
                | [0xa1, 0xb2, 0xc3, 0xd4]
                | [0x4d, 0x3c, 0xb2, 0xa1]
                | [0xa1, 0xb2, 0x3c, 0x4d]
        );
    let packets = if is_pcap {
        parse_pcap(&bytes)?
    } else {
        parse_packet_csv(std::str::from_utf8(&bytes).context("packet CSV is not UTF-8")?)?
    };
    if packets.is_empty() {
        bail!("{} holds no TCP/UDP packets", input.display());
    }
    let flows = truncate_flows(&assemble_flows(&packets), trunc_q)?;
    let fm = match feature {
        FeatureArg::IatSize => iat_size_features(&flows)?,
        FeatureArg::StatsHeader => stats_header_features(&flows),
        FeatureArg::SampSize => samp_size_features(&flows, samp_q)?,
    };
    let mut table = FeatureTable::unlabeled(fm.values);
    table.labels = label.map(|l| vec![l; table.ids.len()]);
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn train(
    features: &Path,
    kind: KindArg,
    m: usize,
    d: usize,
    h_quantile: f64,
    k: &str,
    nu: f64,
    seed: u64,
    threshold_fpr: f64,
) -> Result<TrainedModel> {
    let table = read_features(features)?;
    let k_mode = match k {
        "auto" => KMode::AutoQs,
        v => KMode::Fixed(
            v.parse()
                .with_context(|| format!("--k must be `auto` or an integer, got {v:?}"))?,
        ),
    };
    let method = match (kind, k_mode) {
        (KindArg::Ocsvm, _) => Method::Ocsvm,
        (KindArg::Kjl, KMode::AutoQs) => Method::KjlQs,
        (KindArg::Kjl, KMode::Fixed(_)) => Method::Kjl,
        (KindArg::Nystrom, KMode::AutoQs) => Method::NystromQs,
        (KindArg::Nystrom, KMode::Fixed(_)) => Method::Nystrom,
    };
    let cfg = MethodConfig {
        h_quantile,
        k_mode,
        m,
        d,
        nu,
        seed,
        ..default_config(method)
    };
    let mut model = train_method(&cfg, &table.x, None)?;
    if let TrainedModel::Detector(det) = &mut model {
        det.calibrate(&table.x, threshold_fpr)?;
    }
    Ok(model)
}

fn detect(
    model: &TrainedModel,
    table: &FeatureTable,
    calibration: Option<&Matrix>,
    fpr: f64,
) -> Result<String> {
    let threshold = match (calibration, model) {
        (Some(normals), _) => choose_threshold(&model.score_batch(normals)?, fpr)?,
        (None, TrainedModel::Detector(det)) => det
            .threshold
            .context("model has no stored threshold; pass --calibration")?,
        // the hyperplane offset is already subtracted from OCSVM scores
        (None, TrainedModel::Ocsvm(_)) => 0.0,
    };
    let scores = model.score_batch(&table.x)?;
    let mut out = String::from("row_id,score,label\n");
    for (id, s) in table.ids.iter().zip(scores) {
        let label = match verdict(s, threshold) {
            Verdict::Normal => "NORMAL",
            Verdict::Novel => "NOVEL",
        };
        out.push_str(&format!("{id},{s},{label}\n"));
    }
    Ok(out)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Featurize {
            input,
            feature,
            samp_q,
            trunc_q,
            label,
            out,
        } => {
            let table = featurize(&input, feature, samp_q, trunc_q, label)?;
            write(&out, write_features_csv(&table))?;
        }
        Command::Train {
            features,
            kind,
            m,
            d,
            h_quantile,
            k,
            nu,
            seed,
            threshold_fpr,
            out,
        } => {
            let model = train(
                &features,
                kind,
                m,
                d,
                h_quantile,
                &k,
                nu,
                seed,
                threshold_fpr,
            )?;
            write(&out, codec::encode(&model))?;
        }
        Command::Detect {
            model,
            features,
            calibration,
            threshold_fpr,
            out,
        } => {
            let bytes = fs::read(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = codec::decode(&bytes)?;
            let table = read_features(&features)?;
            let calibration = calibration.map(|p| read_features(&p)).transpose()?;
            let csv = detect(
                &model,
                &table,
                calibration.as_ref().map(|t| &t.x),
                threshold_fpr,
            )?;
            write(&out, csv)?;
        }
        Command::Evaluate {
            normal,
            novel,
            methods,
            scenario,
            protocol,
            report: report_path,
            markdown,
        } => {
            let protocol: ExperimentProtocol = match protocol {
                Some(p) => serde_json::from_str(&read_text(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => ExperimentProtocol::default(),
            };
            let normal = read_features(&normal)?;
            let novel = read_features(&novel)?;
            let rep = run_experiment(&normal.x, &novel.x, &methods, &protocol, scenario)?;
            write(&report_path, report::to_json(&rep)?)?;
            if let Some(md) = markdown {
                write(&md, report::to_markdown(&rep))?;
            }
        }
        Command::Synth {
            kind,
            n,
            seed,
            k,
            d,
            separation,
            out,
            out_normal,
            out_novel,
        } => {
            let data = match kind {
                SynthKind::Cic => synth_cluster_in_cluster(n, seed)?,
                SynthKind::Blobs => synth_blobs(n, k, d, separation, seed)?.data,
            };
            if out.is_none() && out_normal.is_none() && out_novel.is_none() {
                bail!("nothing to write: pass --out, --out-normal or --out-novel");
            }
            if let Some(path) = out {
                let table = FeatureTable {
                    labels: Some(data.labels.iter().map(|l| l.to_string()).collect()),
                    ..FeatureTable::unlabeled(data.x.clone())
                };
                write(&path, write_features_csv(&table))?;
            }
            for (path, class) in [(out_normal, 0), (out_novel, 1)] {
                if let Some(path) = path {
                    if !matches!(kind, SynthKind::Cic) {
                        bail!("--out-normal/--out-novel apply to --kind cic only");
                    }
                    write(
                        &path,
                        write_features_csv(&FeatureTable::unlabeled(data.class(class))),
                    )?;
                }
            }
        }
    }
    Ok(())
}
