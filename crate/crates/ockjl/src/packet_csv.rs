//! Canonical packet-record CSV.

use std::fmt::Write as _;
use std::net::Ipv4Addr;

use ockjl_core::{PacketRecord, Proto};

use crate::error::{Error, Result};

pub const PACKET_HEADER: [&str; 9] = [
    "timestamp_us",
    "src_ip",
    "src_port",
    "dst_ip",
    "dst_port",
    "proto",
    "size_bytes",
    "ttl",
    "tcp_flags",
];

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse().map_err(|_| Error::Csv {
        line,
        msg: format!("bad {} value {raw:?}", PACKET_HEADER[i]),
    })
}

pub fn parse_packet_csv(text: &str) -> Result<Vec<PacketRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Csv {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().ne(PACKET_HEADER) {
        return Err(Error::Csv {
            line: 1,
            msg: format!("expected header {}", PACKET_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let rec = row.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != PACKET_HEADER.len() {
            return Err(Error::Csv {
                line,
                msg: format!(
                    "expected {} fields, found {}",
                    PACKET_HEADER.len(),
                    rec.len()
                ),
            });
        }
        let src: Ipv4Addr = field(&rec, 1, line)?;
        let dst: Ipv4Addr = field(&rec, 3, line)?;
        let r = PacketRecord {
            timestamp_us: field(&rec, 0, line)?,
            src_ip: src.octets(),
            src_port: field(&rec, 2, line)?,
            dst_ip: dst.octets(),
            dst_port: field(&rec, 4, line)?,
            proto: field::<Proto>(&rec, 5, line)?,
            size_bytes: field(&rec, 6, line)?,
            ttl: field(&rec, 7, line)?,
            tcp_flags: field(&rec, 8, line)?,
        };
        if !r.is_valid() {
            return Err(Error::Csv {
                line,
                msg: "size below 20 bytes or TCP flags on a UDP packet".into(),
            });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn write_packet_csv(records: &[PacketRecord]) -> String {
    let mut s = PACKET_HEADER.join(",");
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.timestamp_us,
            Ipv4Addr::from(r.src_ip),
            r.src_port,
            Ipv4Addr::from(r.dst_ip),
            r.dst_port,
            r.proto,
            r.size_bytes,
            r.ttl,
            r.tcp_flags
        )
        .expect("writing to a String cannot fail");
    }
    s
}
