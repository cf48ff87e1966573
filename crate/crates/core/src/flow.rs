//! Bidirectional flow assembly, duration truncation, and the three flow
//! feature representations (IAT+SIZE, STATS+HEADER, SAMP-SIZE).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[cfg(not(any(test, feature = "std")))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::packet::{tcp_flags, PacketRecord, Proto};
use crate::stats::{mean_std, percentile};

/// Canonical bidirectional 5-tuple: the lexicographically smaller
/// `(ip, port)` endpoint comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowKey {
    pub ip_lo: [u8; 4],
    pub port_lo: u16,
    pub ip_hi: [u8; 4],
    pub port_hi: u16,
    pub proto: Proto,
}

impl FlowKey {
    pub fn of(p: &PacketRecord) -> Self {
        let a = (p.src_ip, p.src_port);
        let b = (p.dst_ip, p.dst_port);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self {
            ip_lo: lo.0,
            port_lo: lo.1,
            ip_hi: hi.0,
            port_hi: hi.1,
            proto: p.proto,
        }
    }
}

/// Time-ordered packets sharing one canonical key. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub key: FlowKey,
    pub packets: Vec<PacketRecord>,
}

impl Flow {
    pub fn first_ts(&self) -> u64 {
        self.packets[0].timestamp_us
    }

    /// Last minus first timestamp, in microseconds.
    pub fn duration_us(&self) -> u64 {
        self.packets[self.packets.len() - 1].timestamp_us - self.first_ts()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    IatSize,
    StatsHeader,
    SampSize,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::IatSize => "iat_size",
            FeatureKind::StatsHeader => "stats_header",
            FeatureKind::SampSize => "samp_size",
        }
    }
}

/// One feature row per flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub values: Matrix,
}

impl FeatureMatrix {
    pub fn dim(&self) -> usize {
        self.values.cols()
    }
}

/// Number of STATS+HEADER columns.
pub const STATS_HEADER_DIM: usize = 19;

/// Groups records by canonical key. Flows come out in order of their first
/// packet; packets inside a flow are stably sorted by timestamp.
pub fn assemble_flows(records: &[PacketRecord]) -> Vec<Flow> {
    let mut index: BTreeMap<FlowKey, usize> = BTreeMap::new();
    let mut flows: Vec<Flow> = Vec::new();
    for r in records {
        let key = FlowKey::of(r);
        let slot = *index.entry(key).or_insert_with(|| {
            flows.push(Flow {
                key,
                packets: Vec::new(),
            });
            flows.len() - 1
        });
        flows[slot].packets.push(*r);
    }
    for f in &mut flows {
        f.packets.sort_by_key(|p| p.timestamp_us);
    }
    flows
}

/// Truncates every flow to the `q`-percentile of flow durations in the set.
pub fn truncate_flows(flows: &[Flow], q: f64) -> Result<Vec<Flow>> {
    if flows.is_empty() {
        return Err(Error::Empty("truncate_flows needs at least one flow"));
    }
    let durations: Vec<f64> = flows.iter().map(|f| f.duration_us() as f64).collect();
    let cutoff = percentile(&durations, q)? as u64;
    Ok(truncate_flows_at(flows, cutoff))
}

/// Keeps packets with `ts ≤ first_ts + cutoff_us`. The first packet always survives.
pub fn truncate_flows_at(flows: &[Flow], cutoff_us: u64) -> Vec<Flow> {
    flows
        .iter()
        .map(|f| {
            let limit = f.first_ts().saturating_add(cutoff_us);
            Flow {
                key: f.key,
                packets: f
                    .packets
                    .iter()
                    .take_while(|p| p.timestamp_us <= limit)
                    .copied()
                    .collect(),
            }
        })
        .collect()
}

/// 90th nearest-rank percentile of packet counts, the per-flow length `L`.
fn length_cutoff(flows: &[Flow]) -> Result<usize> {
    let counts: Vec<f64> = flows.iter().map(|f| f.packets.len() as f64).collect();
    Ok(percentile(&counts, 0.9)? as usize)
}

/// IAT+SIZE: `L−1` inter-arrival times (µs) followed by `L` packet sizes,
/// each block zero-padded, with `L` the 90th percentile of packet counts.
pub fn iat_size_features(flows: &[Flow]) -> Result<FeatureMatrix> {
    if flows.is_empty() {
        return Err(Error::Empty("no flows to featurize"));
    }
    let l = length_cutoff(flows)?;
    Ok(iat_size_with_length(flows, l))
}

/// IAT+SIZE with an explicit packet budget `L` (dimension `2L−1`).
pub fn iat_size_with_length(flows: &[Flow], l: usize) -> FeatureMatrix {
    let dim = 2 * l - 1;
    let mut values = Matrix::zeros(flows.len(), dim);
    for (i, f) in flows.iter().enumerate() {
        let row = values.row_mut(i);
        let used = f.packets.len().min(l);
        for j in 1..used {
            row[j - 1] = (f.packets[j].timestamp_us - f.packets[j - 1].timestamp_us) as f64;
        }
        for j in 0..used {
            row[l - 1 + j] = f64::from(f.packets[j].size_bytes);
        }
    }
    FeatureMatrix {
        kind: FeatureKind::IatSize,
        values,
    }
}

/// STATS+HEADER: 19 flow statistics, see [`stats_header_row`].
pub fn stats_header_features(flows: &[Flow]) -> FeatureMatrix {
    let mut values = Matrix::zeros(flows.len(), STATS_HEADER_DIM);
    for (i, f) in flows.iter().enumerate() {
        values.row_mut(i).copy_from_slice(&stats_header_row(f));
    }
    FeatureMatrix {
        kind: FeatureKind::StatsHeader,
        values,
    }
}

/// `[duration_s, pkts/s, bytes/s, mean, std, q1, q2, q3, min, max, mean TTL,
/// FIN, SYN, RST, PSH, ACK, URG, ECE, CWR counts]`. Rates divide by the
/// duration floored at 1 µs.
pub fn stats_header_row(f: &Flow) -> [f64; STATS_HEADER_DIM] {
    let sizes: Vec<f64> = f.packets.iter().map(|p| f64::from(p.size_bytes)).collect();
    let n = sizes.len() as f64;
    let duration_s = f.duration_us() as f64 / 1e6;
    let rate_base = duration_s.max(1e-6);
    let total_bytes: f64 = sizes.iter().sum();
    let (mean, std) = mean_std(&sizes);
    // sizes is never empty, so the percentiles cannot fail
    let q = |p: f64| percentile(&sizes, p).unwrap_or(0.0);
    let min = sizes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sizes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean_ttl = f.packets.iter().map(|p| f64::from(p.ttl)).sum::<f64>() / n;

    let mut row = [0.0; STATS_HEADER_DIM];
    row[..11].copy_from_slice(&[
        duration_s,
        n / rate_base,
        total_bytes / rate_base,
        mean,
        std,
        q(0.25),
        q(0.5),
        q(0.75),
        min,
        max,
        mean_ttl,
    ]);
    for (slot, flag) in row[11..].iter_mut().zip(tcp_flags::ALL) {
        *slot = f.packets.iter().filter(|p| p.tcp_flags & flag != 0).count() as f64;
    }
    row
}

/// SAMP-SIZE: byte counts in equal time bins of width
/// `δ = percentile(durations, q) / L` (floored at 1 µs), `D = L` bins.
pub fn samp_size_features(flows: &[Flow], q: f64) -> Result<FeatureMatrix> {
    if flows.is_empty() {
        return Err(Error::Empty("no flows to featurize"));
    }
    let l = length_cutoff(flows)?;
    let durations: Vec<f64> = flows.iter().map(|f| f.duration_us() as f64).collect();
    let interval = (percentile(&durations, q)? / l as f64).max(1.0);
    Ok(samp_size_with_interval(flows, l, interval))
}

/// SAMP-SIZE with explicit bin count and bin width (µs).
pub fn samp_size_with_interval(flows: &[Flow], bins: usize, interval_us: f64) -> FeatureMatrix {
    let mut values = Matrix::zeros(flows.len(), bins);
    for (i, f) in flows.iter().enumerate() {
        let start = f.first_ts();
        let row = values.row_mut(i);
        for p in &f.packets {
            let bin = ((p.timestamp_us - start) as f64 / interval_us).floor() as usize;
            if bin < bins {
                row[bin] += f64::from(p.size_bytes);
            }
        }
    }
    FeatureMatrix {
        kind: FeatureKind::SampSize,
        values,
    }
}
