//! Little-endian model files.
//!
//! Detector: `OCKJ`, version, kind, `u32` m, d, D, k, then landmarks (m·D),
//! P (d·m), h, π (k), μ (k·d), Σ (k·d·d) and an optional threshold.
//! OCSVM: `OSVM`, version, `u32` ñ, D, then support vectors (ñ·D), α (ñ), ρ, h.

use ockjl_core::eval::TrainedModel;
use ockjl_core::{
    Bandwidth, DetectorModel, EmbeddingKind, EmbeddingModel, GmmModel, Matrix, OcsvmModel,
};

use crate::error::{Error, Result};

pub const DETECTOR_MAGIC: &[u8; 4] = b"OCKJ";
pub const OCSVM_MAGIC: &[u8; 4] = b"OSVM";
pub const VERSION: u8 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("model dimension fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn encode_detector(model: &DetectorModel) -> Vec<u8> {
    let emb = &model.embedding;
    let gmm = &model.gmm;
    let mut w = Writer(Vec::with_capacity(ockjl_core::detector_bytes(model)));
    w.0.extend_from_slice(DETECTOR_MAGIC);
    w.0.push(VERSION);
    w.0.push(emb.kind.tag());
    w.u32(emb.m());
    w.u32(emb.d());
    w.u32(emb.input_dim());
    w.u32(gmm.k());
    w.f64s(emb.landmarks.as_slice());
    w.f64s(emb.projection.as_slice());
    w.f64s(&[emb.bandwidth.get()]);
    w.f64s(gmm.weights());
    w.f64s(gmm.means().as_slice());
    for c in gmm.covariances() {
        w.f64s(c.as_slice());
    }
    if let Some(t) = model.threshold {
        w.f64s(&[t]);
    }
    w.0
}

pub fn encode_ocsvm(model: &OcsvmModel) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(ockjl_core::ocsvm::ocsvm_bytes(model)));
    w.0.extend_from_slice(OCSVM_MAGIC);
    w.0.push(VERSION);
    w.u32(model.n_support());
    w.u32(model.input_dim());
    w.f64s(model.support_vectors.as_slice());
    w.f64s(&model.alpha);
    w.f64s(&[model.rho, model.bandwidth.get()]);
    w.0
}

pub fn encode(model: &TrainedModel) -> Vec<u8> {
    match model {
        TrainedModel::Detector(m) => encode_detector(m),
        TrainedModel::Ocsvm(m) => encode_ocsvm(m),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(Error::Codec("truncated payload"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or(Error::Codec("size overflow"))?;
        let b = self.take(len)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(self.f64s(1)?[0])
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4)? != magic {
            return Err(Error::Codec("bad magic"));
        }
        if self.u8()? != VERSION {
            return Err(Error::Codec("unsupported version"));
        }
        Ok(())
    }
}

pub fn decode_detector(bytes: &[u8]) -> Result<DetectorModel> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(DETECTOR_MAGIC)?;
    let kind = EmbeddingKind::from_tag(r.u8()?).ok_or(Error::Codec("unknown embedding kind"))?;
    let (m, d, dim, k) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
    let landmarks = Matrix::from_vec(m, dim, r.f64s(m * dim)?)?;
    let projection = Matrix::from_vec(d, m, r.f64s(d * m)?)?;
    let bandwidth = Bandwidth::new(r.f64()?)?;
    let weights = r.f64s(k)?;
    let means = Matrix::from_vec(k, d, r.f64s(k * d)?)?;
    let covariances = (0..k)
        .map(|_| Ok(Matrix::from_vec(d, d, r.f64s(d * d)?)?))
        .collect::<Result<Vec<_>>>()?;
    let threshold = match r.remaining() {
        0 => None,
        8 => {
            let t = r.f64()?;
            if !t.is_finite() {
                return Err(Error::Codec("non-finite threshold"));
            }
            Some(t)
        }
        _ => return Err(Error::Codec("unexpected trailing bytes")),
    };
    Ok(DetectorModel {
        embedding: EmbeddingModel::new(kind, landmarks, projection, bandwidth)?,
        gmm: GmmModel::new(weights, means, covariances)?,
        threshold,
    })
}

pub fn decode_ocsvm(bytes: &[u8]) -> Result<OcsvmModel> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(OCSVM_MAGIC)?;
    let (n, dim) = (r.u32()?, r.u32()?);
    let support_vectors = Matrix::from_vec(n, dim, r.f64s(n * dim)?)?;
    let alpha = r.f64s(n)?;
    let rho = r.f64()?;
    let bandwidth = Bandwidth::new(r.f64()?)?;
    if r.remaining() != 0 {
        return Err(Error::Codec("unexpected trailing bytes"));
    }
    Ok(OcsvmModel {
        support_vectors,
        alpha,
        rho,
        bandwidth,
    })
}

/// Dispatches on the magic number.
pub fn decode(bytes: &[u8]) -> Result<TrainedModel> {
    match bytes.get(..4) {
        Some(m) if m == DETECTOR_MAGIC => Ok(TrainedModel::Detector(decode_detector(bytes)?)),
        Some(m) if m == OCSVM_MAGIC => Ok(TrainedModel::Ocsvm(decode_ocsvm(bytes)?)),
        Some(_) => Err(Error::Codec("bad magic")),
        None => Err(Error::Codec("truncated payload")),
    }
}
