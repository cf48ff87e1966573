//! File formats, packet ingest, the benchmark harness and the `ockjl` CLI
//! built on [`ockjl_core`].

pub mod codec;
pub mod error;
pub mod experiment;
pub mod features_csv;
pub mod packet_csv;
pub mod pcap;
pub mod report;

pub use error::{Error, Result};
