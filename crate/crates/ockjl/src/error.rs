use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pcap: {msg} at byte offset {offset}")]
    Pcap { offset: usize, msg: &'static str },
    #[error("csv line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("model file: {0}")]
    Codec(&'static str),
    #[error("{0}")]
    Experiment(String),
    #[error(transparent)]
    Core(#[from] ockjl_core::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
