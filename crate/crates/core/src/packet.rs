use core::fmt;
use core::str::FromStr;

/// Transport protocol of a parsed packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proto {
    Tcp,
    Udp,
}

impl Proto {
    /// IANA protocol number.
    pub fn number(self) -> u8 {
        match self {
            Proto::Tcp => 6,
            Proto::Udp => 17,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            6 => Some(Proto::Tcp),
            17 => Some(Proto::Udp),
            _ => None,
        }
    }
}

impl fmt::Display for Proto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Proto::Tcp => "TCP",
            Proto::Udp => "UDP",
        })
    }
}

impl FromStr for Proto {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "TCP" => Ok(Proto::Tcp),
            "UDP" => Ok(Proto::Udp),
            _ => Err(()),
        }
    }
}

/// TCP flag bits as they appear in byte 13 of the TCP header.
pub mod tcp_flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const RST: u8 = 0x04;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
    pub const URG: u8 = 0x20;
    pub const ECE: u8 = 0x40;
    pub const CWR: u8 = 0x80;

    /// Feature order used by the STATS+HEADER extractor.
    pub const ALL: [u8; 8] = [FIN, SYN, RST, PSH, ACK, URG, ECE, CWR];
}

/// One IPv4 TCP/UDP packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PacketRecord {
    pub timestamp_us: u64,
    pub src_ip: [u8; 4],
    pub dst_ip: [u8; 4],
    pub src_port: u16,
    pub dst_port: u16,
    pub proto: Proto,
    /// IPv4 total-length field.
    pub size_bytes: u16,
    pub ttl: u8,
    /// Zero for UDP.
    pub tcp_flags: u8,
}

impl PacketRecord {
    /// Checks the record-level invariants (`size_bytes ≥ 20`, no flags on UDP).
    pub fn is_valid(&self) -> bool {
        self.size_bytes >= 20 && (self.proto == Proto::Tcp || self.tcp_flags == 0)
    }
}
