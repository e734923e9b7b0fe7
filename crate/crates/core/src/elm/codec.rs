//! Binary model layout. All integers and floats are little-endian.
//!
//! ```text
//! magic        6 bytes   "MLELM1"
//! features     u64       D
//! hidden       u64       Ñ
//! labels       u64       M
//! activation   u8        0 sigmoid, 1 tanh, 2 hardlimit
//! threshold    f64
//! thr_method   u8        0 fixed, 1 midpoint-calibrated
//! seed         u64
//! ridge_mode   u8        0 fixed, 1 auto
//! ridge        f64       (0 when auto)
//! weight_lo    f64
//! weight_hi    f64
//! thr_mode     u8        0 auto, 1 fixed
//! thr_fixed    f64       (0 when auto)
//! top1         u8
//! norm         D × (shift f64, scale f64)
//! label names  M × (u32 byte length, UTF-8 bytes)
//! W            Ñ×D f64 row-major
//! b            Ñ f64
//! β            Ñ×M f64 row-major
//! checksum     32 bytes  SHA-256 of everything above
//! ```

use sha2::{Digest, Sha256};

use super::{Activation, ElmConfig, ElmModel, Normalization, Ridge, ThresholdMode};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::multilabel::ThresholdMethod;

pub const MAGIC: &[u8; 6] = b"MLELM1";
const CHECKSUM_LEN: usize = 32;

pub(super) fn encode(model: &ElmModel) -> Vec<u8> {
    let d = model.feature_count();
    let n = model.hidden_count();
    let m = model.label_count();
    let cfg = &model.config;
    let mut out = Vec::with_capacity(128 + 8 * (2 * d + n * (d + 1 + m)));
    out.extend_from_slice(MAGIC);
    for v in [d as u64, n as u64, m as u64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(model.activation().id());
    out.extend_from_slice(&model.threshold.to_le_bytes());
    out.push(model.threshold_method.id());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    let (ridge_mode, ridge) = match cfg.ridge {
        Ridge::Fixed(r) => (0u8, r),
        Ridge::Auto => (1u8, 0.0),
    };
    out.push(ridge_mode);
    out.extend_from_slice(&ridge.to_le_bytes());
    out.extend_from_slice(&cfg.weight_range.0.to_le_bytes());
    out.extend_from_slice(&cfg.weight_range.1.to_le_bytes());
    let (thr_mode, thr_fixed) = match cfg.threshold {
        ThresholdMode::Auto => (0u8, 0.0),
        ThresholdMode::Fixed(t) => (1u8, t),
    };
    out.push(thr_mode);
    out.extend_from_slice(&thr_fixed.to_le_bytes());
    out.push(cfg.top1_fallback as u8);
    for j in 0..d {
        out.extend_from_slice(&model.normalization.shift[j].to_le_bytes());
        out.extend_from_slice(&model.normalization.scale[j].to_le_bytes());
    }
    for name in &model.label_names {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    let floats = model
        .input_weights
        .as_slice()
        .iter()
        .chain(&model.biases)
        .chain(model.output_weights.as_slice());
    for v in floats {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Model(format!("truncated while reading {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        usize::try_from(self.u64(what)?).map_err(|_| Error::Model(format!("{what} overflows usize")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Model(format!("{what} too large")))?, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<ElmModel> {
    if bytes.len() < MAGIC.len() + CHECKSUM_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Model("missing MLELM1 header".into()));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(Error::Model("checksum mismatch".into()));
    }
    let mut r = Reader {
        buf: body,
        pos: MAGIC.len(),
    };
    let d = r.count("feature count")?;
    let n = r.count("hidden count")?;
    let m = r.count("label count")?;
    let activation = Activation::from_id(r.u8("activation")?).ok_or_else(|| Error::Model("unknown activation id".into()))?;
    let threshold = r.f64("threshold")?;
    let threshold_method =
        ThresholdMethod::from_id(r.u8("threshold method")?).ok_or_else(|| Error::Model("unknown threshold method".into()))?;
    let seed = r.u64("seed")?;
    let ridge_mode = r.u8("ridge mode")?;
    let ridge_value = r.f64("ridge")?;
    let ridge = match ridge_mode {
        0 => Ridge::Fixed(ridge_value),
        1 => Ridge::Auto,
        _ => return Err(Error::Model("unknown ridge mode".into())),
    };
    let weight_range = (r.f64("weight range")?, r.f64("weight range")?);
    let thr_mode = r.u8("threshold mode")?;
    let thr_fixed = r.f64("fixed threshold")?;
    let threshold_mode = match thr_mode {
        0 => ThresholdMode::Auto,
        1 => ThresholdMode::Fixed(thr_fixed),
        _ => return Err(Error::Model("unknown threshold mode".into())),
    };
    let top1_fallback = match r.u8("top1 flag")? {
        0 => false,
        1 => true,
        _ => return Err(Error::Model("bad top1 flag".into())),
    };
    let mut shift = Vec::with_capacity(d.min(1 << 20));
    let mut scale = Vec::with_capacity(d.min(1 << 20));
    for _ in 0..d {
        shift.push(r.f64("normalization")?);
        scale.push(r.f64("normalization")?);
    }
    let mut label_names = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        let len = r.u32("label name length")? as usize;
        let raw = r.take(len, "label name")?;
        let name = std::str::from_utf8(raw).map_err(|_| Error::Model("label name is not UTF-8".into()))?;
        label_names.push(name.to_string());
    }
    let size = |a: usize, b: usize| a.checked_mul(b).ok_or_else(|| Error::Model("dimensions overflow".into()));
    let weights = DenseMatrix::new(n, d, r.f64s(size(n, d)?, "input weights")?)
        .map_err(|e| Error::Model(format!("input weights: {e}")))?;
    let biases = r.f64s(n, "biases")?;
    let beta = DenseMatrix::new(n, m, r.f64s(size(n, m)?, "output weights")?)
        .map_err(|e| Error::Model(format!("output weights: {e}")))?;
    if r.pos != body.len() {
        return Err(Error::Model(format!("{} trailing bytes", body.len() - r.pos)));
    }
    let config = ElmConfig {
        hidden_neurons: n,
        activation,
        seed,
        ridge,
        weight_range,
        threshold: threshold_mode,
        top1_fallback,
    };
    ElmModel::from_parts(
        weights,
        biases,
        beta,
        threshold,
        threshold_method,
        Normalization { shift, scale },
        label_names,
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> ElmModel {
        let mut config = ElmConfig::new(2).with_seed(99).with_ridge(Ridge::Fixed(1e-3));
        config.top1_fallback = true;
        ElmModel::from_parts(
            DenseMatrix::from_rows(&[[0.5, -0.25, 1.0], [0.125, 0.75, -1.0]]).unwrap(),
            vec![0.3, 0.9],
            DenseMatrix::from_rows(&[[1.5, -2.0], [0.0, 3.25]]).unwrap(),
            0.0625,
            ThresholdMethod::MidpointCalibrated,
            Normalization {
                shift: vec![1.0, 2.0, 3.0],
                scale: vec![0.5, 0.0, 2.0],
            },
            vec!["amazed-suprised".into(), "ünïcode".into()],
            config,
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_preserves_model() {
        let m = sample_model();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..6], b"MLELM1");
        assert_eq!(ElmModel::from_bytes(&bytes).unwrap(), m);
    }

    #[test]
    fn header_fields_are_little_endian() {
        let bytes = sample_model().to_bytes();
        assert_eq!(u64::from_le_bytes(bytes[6..14].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[14..22].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[22..30].try_into().unwrap()), 2);
        assert_eq!(bytes[30], Activation::Sigmoid.id());
        assert_eq!(f64::from_le_bytes(bytes[31..39].try_into().unwrap()), 0.0625);
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = sample_model().to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(ElmModel::from_bytes(&bytes), Err(Error::Model(_))));
        assert!(ElmModel::from_bytes(b"MLELM0").is_err());
        let good = sample_model().to_bytes();
        assert!(ElmModel::from_bytes(&good[..good.len() - 1]).is_err());
    }
}
