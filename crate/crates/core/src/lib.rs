//! One-class novelty detection with explicit kernel embeddings.
//!
//! Training data is mapped into a low-dimensional space with a Nyström or
//! Gaussian-sketch (KJL) projection, a full-covariance Gaussian mixture is fit
//! there (component count picked by Quickshift++ mode seeking or fixed), and
//! new points are scored by their mixture log-density. A Gaussian-kernel
//! one-class SVM is included as the reference detector, together with flow
//! featurization and the evaluation metrics used to compare the two.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, timing and the
//! command line live in the `ockjl` companion crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod detector;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod flow;
pub mod gmm;
pub mod kernel;
pub mod matrix;
pub mod ocsvm;
pub mod packet;
pub mod quickshift;
pub mod stats;
pub mod synth;

pub use detector::{
    choose_threshold, detector_bytes, train_detector, BandwidthChoice, DetectorConfig,
    DetectorModel, KMode, Verdict,
};
pub use embedding::{fit_kjl, fit_nystrom, EmbeddingKind, EmbeddingModel};
pub use error::{Error, Result};
pub use gmm::{fit_em, EmOptions, GmmModel};
pub use kernel::{gaussian_kernel, gram, pairwise_distances, quantile_bandwidth, Bandwidth};
pub use matrix::Matrix;
pub use ocsvm::{train_ocsvm, OcsvmModel, OcsvmParams};
pub use packet::{PacketRecord, Proto};

/// Deterministic generator used everywhere a seed is accepted.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
