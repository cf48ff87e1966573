use ockjl_core::flow::{
    assemble_flows, iat_size_features, samp_size_features, stats_header_features, truncate_flows,
    truncate_flows_at, FlowKey, STATS_HEADER_DIM,
};
use ockjl_core::{PacketRecord, Proto};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = PacketRecord> {
    (
        0u64..5_000_000,
        0u8..4,
        0u8..4,
        0u16..3,
        0u16..3,
        any::<bool>(),
        20u16..1500,
        any::<u8>(),
        any::<u8>(),
    )
        .prop_map(|(ts, a, b, sp, dp, tcp, size, ttl, flags)| PacketRecord {
            timestamp_us: ts,
            src_ip: [10, 0, 0, a],
            dst_ip: [10, 0, 0, b],
            src_port: 1000 + sp,
            dst_port: 2000 + dp,
            proto: if tcp { Proto::Tcp } else { Proto::Udp },
            size_bytes: size,
            ttl,
            tcp_flags: if tcp { flags } else { 0 },
        })
}

fn records() -> impl Strategy<Value = Vec<PacketRecord>> {
    prop::collection::vec(record(), 1..80)
}

proptest! {
    #[test]
    fn flows_partition_the_records(recs in records()) {
        let flows = assemble_flows(&recs);
        let mut regrouped: Vec<PacketRecord> = flows.iter().flat_map(|f| f.packets.iter().copied()).collect();
        let mut original = recs.clone();
        let key = |p: &PacketRecord| (p.timestamp_us, p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.size_bytes, p.ttl, p.tcp_flags, p.proto.number());
        regrouped.sort_by_key(key);
        original.sort_by_key(key);
        prop_assert_eq!(regrouped, original);
        for f in &flows {
            prop_assert!(!f.packets.is_empty());
            prop_assert!(f.packets.iter().all(|p| FlowKey::of(p) == f.key));
            prop_assert!(f.packets.windows(2).all(|w| w[0].timestamp_us <= w[1].timestamp_us));
        }
        let firsts: Vec<u64> = flows.iter().map(|f| {
            let first_idx = recs.iter().position(|r| FlowKey::of(r) == f.key).unwrap();
            first_idx as u64
        }).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fixed_cutoff_truncation_is_idempotent(recs in records(), cutoff in 0u64..5_000_000) {
        let flows = assemble_flows(&recs);
        let once = truncate_flows_at(&flows, cutoff);
        prop_assert_eq!(truncate_flows_at(&once, cutoff), once.clone());
        prop_assert!(once.iter().all(|f| !f.packets.is_empty()));
    }

    #[test]
    fn truncation_never_empties_flows(recs in records(), q in 0.05f64..1.0) {
        let flows = assemble_flows(&recs);
        let cut = truncate_flows(&flows, q).unwrap();
        prop_assert_eq!(cut.len(), flows.len());
        for (a, b) in cut.iter().zip(&flows) {
            prop_assert!(!a.packets.is_empty() && a.packets.len() <= b.packets.len());
            prop_assert_eq!(a.packets[0], b.packets[0]);
        }
    }

    #[test]
    fn iat_size_dimension_is_odd(recs in records()) {
        let flows = truncate_flows(&assemble_flows(&recs), 0.9).unwrap();
        let m = iat_size_features(&flows).unwrap();
        prop_assert_eq!(m.dim() % 2, 1);
        prop_assert_eq!(m.values.rows(), flows.len());
        prop_assert!(m.values.is_finite());
    }

    #[test]
    fn features_are_deterministic_and_finite(recs in records(), q in 0.1f64..0.95) {
        let flows = truncate_flows(&assemble_flows(&recs), 0.9).unwrap();
        let s = stats_header_features(&flows);
        prop_assert_eq!(s.dim(), STATS_HEADER_DIM);
        prop_assert!(s.values.is_finite());
        prop_assert_eq!(&s, &stats_header_features(&flows));
        let a = samp_size_features(&flows, q).unwrap();
        prop_assert!(a.values.is_finite());
        prop_assert_eq!(a, samp_size_features(&flows, q).unwrap());
    }
}
