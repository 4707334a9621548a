use std::path::Path;

use super::{payload_len, write_atomic, ByteReader, FORMAT_VERSION};
use crate::baselines::{QuantizedBlockModel, QuantizedFactor, QuantizedMatrix};
use crate::compressor::{BlockLowRankModel, BlockPartition, Clustering};
use crate::error::{Error, Result};
use crate::numlin::{FactorPair, Matrix};

pub const MODEL_MAGIC: [u8; 4] = *b"GRLR";
const FLAG_QUANTIZED: u8 = 1;

/// Either kind of compressed model a model file can hold.
#[derive(Clone, Debug, PartialEq)]
pub enum StoredModel {
    Plain(BlockLowRankModel),
    Quantized(QuantizedBlockModel),
}

impl StoredModel {
    pub fn partition(&self) -> &BlockPartition {
        match self {
            StoredModel::Plain(m) => m.partition(),
            StoredModel::Quantized(m) => m.partition(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            StoredModel::Plain(m) => m.dims(),
            StoredModel::Quantized(m) => m.dims(),
        }
    }

    /// Full-precision view; quantized factors are decoded.
    pub fn to_plain(&self) -> BlockLowRankModel {
        match self {
            StoredModel::Plain(m) => m.clone(),
            StoredModel::Quantized(m) => m.dequantized(),
        }
    }
}

fn put_f32_matrix(out: &mut Vec<u8>, m: &Matrix) {
    for &x in m.data() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
}

fn put_quantized(out: &mut Vec<u8>, q: &QuantizedMatrix) {
    let bits = q.bits();
    let (lo, hi) = q.range();
    out.push(bits);
    out.extend_from_slice(&lo.to_le_bytes());
    out.extend_from_slice(&hi.to_le_bytes());
    out.extend_from_slice(&pack_codes(q.codes(), bits));
}

/// Packs `bits`-wide codes least-significant bit first, padding the last byte.
fn pack_codes(codes: &[u16], bits: u8) -> Vec<u8> {
    let total = codes.len() * bits as usize;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0usize;
    for &c in codes {
        for b in 0..bits {
            if (c >> b) & 1 == 1 {
                out[pos / 8] |= 1 << (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

fn unpack_codes(bytes: &[u8], count: usize, bits: u8) -> Vec<u16> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    for _ in 0..count {
        let mut c = 0u16;
        for b in 0..bits {
            if (bytes[pos / 8] >> (pos % 8)) & 1 == 1 {
                c |= 1 << b;
            }
            pos += 1;
        }
        out.push(c);
    }
    out
}

/// `GRLR | version u32 | flags u8 | N u64 | D u64 | c u32`, then per cluster
/// `count u64 | indices u64[count] | rank u32 | U | V`. Plain factors are
/// row-major `f32`; quantized ones are `bits u8 | min f64 | max f64 | packed codes`.
pub fn encode_model(model: &StoredModel) -> Vec<u8> {
    let partition = model.partition();
    let (n, d) = model.dims();
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(match model {
        StoredModel::Plain(_) => 0,
        StoredModel::Quantized(_) => FLAG_QUANTIZED,
    });
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(partition.num_clusters() as u32).to_le_bytes());
    for p in 0..partition.num_clusters() {
        let members = partition.members(p);
        out.extend_from_slice(&(members.len() as u64).to_le_bytes());
        for &i in members {
            out.extend_from_slice(&(i as u64).to_le_bytes());
        }
        out.extend_from_slice(&(partition.rank(p) as u32).to_le_bytes());
        match model {
            StoredModel::Plain(m) => {
                put_f32_matrix(&mut out, &m.factor(p).u);
                put_f32_matrix(&mut out, &m.factor(p).v);
            }
            StoredModel::Quantized(m) => {
                put_quantized(&mut out, &m.factors()[p].u);
                put_quantized(&mut out, &m.factors()[p].v);
            }
        }
    }
    out
}

fn get_f32_matrix(r: &mut ByteReader<'_>, rows: usize, cols: usize) -> Result<Matrix> {
    let bytes = r.take(
        payload_len(rows, cols, 4, "factor payload")?,
        "factor payload",
    )?;
    let data: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    let m = Matrix::new(rows, cols, data)?;
    m.ensure_finite()?;
    Ok(m)
}

fn get_quantized(r: &mut ByteReader<'_>, rows: usize, cols: usize) -> Result<QuantizedMatrix> {
    let bits = r.u8("quantization bits")?;
    if !(1..=16).contains(&bits) {
        return Err(Error::BitsOutOfRange(u32::from(bits)));
    }
    let lo = r.f64("range min")?;
    let hi = r.f64("range max")?;
    let count = payload_len(rows, cols, 1, "codes")?;
    let len = payload_len(count, bits as usize, 1, "codes")?.div_ceil(8);
    let codes = unpack_codes(r.take(len, "codes")?, count, bits);
    QuantizedMatrix::from_parts(rows, cols, bits, codes, lo, hi)
}

/// Inverse of [`encode_model`]. Partition and shape invariants are checked
/// before returning.
pub fn decode_model(bytes: &[u8]) -> Result<StoredModel> {
    let mut r = ByteReader::new(bytes);
    r.magic(MODEL_MAGIC)?;
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::BadVersion(version));
    }
    let flags = r.u8("flags")?;
    if flags & !FLAG_QUANTIZED != 0 {
        return Err(Error::Corrupt(format!("unknown flags {flags:#04x}")));
    }
    let quantized = flags & FLAG_QUANTIZED != 0;
    let n = r.usize("N")?;
    let d = r.usize("D")?;
    if n == 0 || d == 0 {
        return Err(Error::InvalidDimensions { rows: n, cols: d });
    }
    let c = r.u32("cluster count")? as usize;
    if c == 0 || c > n {
        return Err(Error::InvalidPartition(format!(
            "{c} clusters for {n} tokens"
        )));
    }

    let mut members = Vec::with_capacity(c);
    let mut ranks = Vec::with_capacity(c);
    let mut plain = Vec::new();
    let mut quant = Vec::new();
    for _ in 0..c {
        let count = r.usize("member count")?;
        if count > n {
            return Err(Error::InvalidPartition(format!(
                "cluster of {count} members exceeds {n} tokens"
            )));
        }
        let mut list = Vec::with_capacity(count);
        for _ in 0..count {
            list.push(r.usize("member index")?);
        }
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(
                "member indices must be strictly increasing".into(),
            ));
        }
        let k = r.u32("rank")? as usize;
        if k == 0 || k > count.min(d) {
            return Err(Error::RankOutOfRange {
                rank: k,
                max: count.min(d),
            });
        }
        if quantized {
            let u = get_quantized(&mut r, count, k)?;
            let v = get_quantized(&mut r, d, k)?;
            quant.push(QuantizedFactor { u, v });
        } else {
            let u = get_f32_matrix(&mut r, count, k)?;
            let v = get_f32_matrix(&mut r, d, k)?;
            plain.push(FactorPair::new(u, v)?);
        }
        members.push(list);
        ranks.push(k);
    }
    r.finish()?;

    let partition = BlockPartition::new(Clustering::from_members(members, n)?, ranks, d)?;
    Ok(if quantized {
        StoredModel::Quantized(QuantizedBlockModel::new(partition, quant, d)?)
    } else {
        StoredModel::Plain(BlockLowRankModel::new(partition, plain, d)?)
    })
}

pub fn save_model(path: &Path, model: &StoredModel) -> Result<()> {
    write_atomic(path, &encode_model(model))
}

pub fn load_model(path: &Path) -> Result<StoredModel> {
    decode_model(&std::fs::read(path)?)
}
