//! Classic libpcap reader for Ethernet-II / IPv4 / {TCP, UDP} traffic.

use ockjl_core::{PacketRecord, Proto};

use crate::error::{Error, Result};

const GLOBAL_HEADER: usize = 24;
const RECORD_HEADER: usize = 16;
const LINKTYPE_ETHERNET: u32 = 1;
const ETHERTYPE_IPV4: u16 = 0x0800;
const ETH_HEADER: usize = 14;

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u32(self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }
}

/// Parses a capture into packet records in file order. Frames that are not
/// Ethernet-II/IPv4/{TCP,UDP}, IPv4 fragments, and frames whose captured bytes
/// stop inside the headers are skipped.
pub fn parse_pcap(bytes: &[u8]) -> Result<Vec<PacketRecord>> {
    if bytes.len() < GLOBAL_HEADER {
        return Err(Error::Pcap {
            offset: bytes.len(),
            msg: "global header truncated",
        });
    }
    let magic = [bytes[0], bytes[1], bytes[2], bytes[3]];
    let (endian, nanos) = match magic {
        [0xd4, 0xc3, 0xb2, 0xa1] => (Endian::Little, false),
        [0xa1, 0xb2, 0xc3, 0xd4] => (Endian::Big, false),
        [0x4d, 0x3c, 0xb2, 0xa1] => (Endian::Little, true),
        [0xa1, 0xb2, 0x3c, 0x4d] => (Endian::Big, true),
        _ => {
            return Err(Error::Pcap {
                offset: 0,
                msg: "unknown magic number",
            })
        }
    };
    if endian.u32(&bytes[20..24]) != LINKTYPE_ETHERNET {
        return Err(Error::Pcap {
            offset: 20,
            msg: "link type is not Ethernet",
        });
    }

    let mut out = Vec::new();
    let mut pos = GLOBAL_HEADER;
    while pos < bytes.len() {
        if bytes.len() - pos < RECORD_HEADER {
            return Err(Error::Pcap {
                offset: pos,
                msg: "record header truncated",
            });
        }
        let h = &bytes[pos..pos + RECORD_HEADER];
        let sec = endian.u32(&h[0..4]) as u64;
        let frac = endian.u32(&h[4..8]) as u64;
        let incl = endian.u32(&h[8..12]) as usize;
        let body = pos + RECORD_HEADER;
        if bytes.len() - body < incl {
            return Err(Error::Pcap {
                offset: pos,
                msg: "packet data truncated",
            });
        }
        let micros = if nanos { frac / 1000 } else { frac };
        if let Some(rec) = decode_frame(&bytes[body..body + incl], sec * 1_000_000 + micros) {
            out.push(rec);
        }
        pos = body + incl;
    }
    Ok(out)
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn decode_frame(frame: &[u8], timestamp_us: u64) -> Option<PacketRecord> {
    if frame.len() < ETH_HEADER + 20 || be16(&frame[12..14]) != ETHERTYPE_IPV4 {
        return None;
    }
    let ip = &frame[ETH_HEADER..];
    if ip[0] >> 4 != 4 {
        return None;
    }
    let ihl = usize::from(ip[0] & 0x0f) * 4;
    let total_length = be16(&ip[2..4]);
    // more-fragments flag or a non-zero offset
    if be16(&ip[6..8]) & 0x3fff != 0 || ihl < 20 || total_length < 20 {
        return None;
    }
    let proto = Proto::from_number(ip[9])?;
    let l4 = ip.get(ihl..)?;
    let need = match proto {
        Proto::Tcp => 14,
        Proto::Udp => 4,
    };
    if l4.len() < need {
        return None;
    }
    Some(PacketRecord {
        timestamp_us,
        src_ip: [ip[12], ip[13], ip[14], ip[15]],
        dst_ip: [ip[16], ip[17], ip[18], ip[19]],
        src_port: be16(&l4[0..2]),
        dst_port: be16(&l4[2..4]),
        proto,
        size_bytes: total_length,
        ttl: ip[8],
        tcp_flags: match proto {
            Proto::Tcp => l4[13],
            Proto::Udp => 0,
        },
    })
}
