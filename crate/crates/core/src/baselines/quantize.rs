use crate::compressor::{BlockLowRankModel, BlockPartition};
use crate::error::{Error, Result};
use crate::numlin::{FactorPair, Matrix};

/// A matrix stored as `b`-bit codes over `2^b` equal intervals of its range.
///
/// Code `c` decodes to the midpoint `range_min + (c + 0.5) * w` with
/// `w = (range_max - range_min) / 2^b`. A zero-width range decodes to
/// `range_min` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedMatrix {
    rows: usize,
    cols: usize,
    bits: u8,
    codes: Vec<u16>,
    range_min: f64,
    range_max: f64,
}

impl QuantizedMatrix {
    /// Reassembles a quantized matrix, e.g. from a file.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        bits: u8,
        codes: Vec<u16>,
        range_min: f64,
        range_max: f64,
    ) -> Result<Self> {
        check_bits(u32::from(bits))?;
        if rows.checked_mul(cols) != Some(codes.len()) {
            return Err(Error::InvalidDimensions { rows, cols });
        }
        if !(range_min.is_finite() && range_max.is_finite() && range_min <= range_max) {
            return Err(Error::Corrupt(format!(
                "quantization range [{range_min}, {range_max}] is invalid"
            )));
        }
        let levels = 1u32 << bits;
        if let Some(c) = codes.iter().find(|&&c| u32::from(c) >= levels) {
            return Err(Error::Corrupt(format!("code {c} exceeds {bits}-bit range")));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            codes,
            range_min,
            range_max,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn range(&self) -> (f64, f64) {
        (self.range_min, self.range_max)
    }

    /// Interval width `(max - min) / 2^b`.
    pub fn width(&self) -> f64 {
        (self.range_max - self.range_min) / f64::from(1u32 << self.bits)
    }

    fn representative(&self, code: u16) -> f64 {
        let w = self.width();
        if w == 0.0 {
            self.range_min
        } else {
            self.range_min + (f64::from(code) + 0.5) * w
        }
    }

    /// Storage in bits: `b` per code plus two 32-bit range scalars.
    pub fn storage_bits(&self) -> u64 {
        self.codes.len() as u64 * u64::from(self.bits) + 64
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if (1..=16).contains(&bits) {
        Ok(())
    } else {
        Err(Error::BitsOutOfRange(bits))
    }
}

/// Uniform `bits`-bit quantization over `[min(M), max(M)]`.
pub fn quantize_uniform(m: &Matrix, bits: u32) -> Result<QuantizedMatrix> {
    check_bits(bits)?;
    m.ensure_finite()?;
    if m.data().is_empty() {
        return Err(Error::InvalidDimensions {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let lo = m.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut q = QuantizedMatrix {
        rows: m.rows(),
        cols: m.cols(),
        bits: bits as u8,
        codes: vec![0; m.data().len()],
        range_min: lo,
        range_max: hi,
    };
    let w = q.width();
    if w == 0.0 {
        return Ok(q);
    }
    let top = (1u32 << bits) - 1;
    let codes: Vec<u16> = m
        .data()
        .iter()
        .map(|&x| {
            let raw = ((x - lo) / w).floor();
            let mut code = if raw <= 0.0 { 0 } else { (raw as u32).min(top) };
            // Rounding in the division can land one interval off near a
            // boundary; settle on the nearest representative.
            let err = |c: u32| (x - (lo + (f64::from(c) + 0.5) * w)).abs();
            if code > 0 && err(code - 1) < err(code) {
                code -= 1;
            } else if code < top && err(code + 1) < err(code) {
                code += 1;
            }
            code as u16
        })
        .collect();
    q.codes = codes;
    Ok(q)
}

/// Midpoint decoding of every code.
pub fn dequantize(q: &QuantizedMatrix) -> Matrix {
    let data = q.codes.iter().map(|&c| q.representative(c)).collect();
    Matrix::new(q.rows, q.cols, data).expect("codes match shape")
}

/// Quantized `U` and `V` of one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedFactor {
    pub u: QuantizedMatrix,
    pub v: QuantizedMatrix,
}

/// A block low-rank model whose factors are stored as `b`-bit codes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedBlockModel {
    partition: BlockPartition,
    factors: Vec<QuantizedFactor>,
    dim: usize,
}

impl QuantizedBlockModel {
    pub fn new(
        partition: BlockPartition,
        factors: Vec<QuantizedFactor>,
        dim: usize,
    ) -> Result<Self> {
        partition.validate(dim)?;
        if factors.len() != partition.num_clusters() {
            return Err(Error::InvalidPartition(format!(
                "{} factor pairs for {} clusters",
                factors.len(),
                partition.num_clusters()
            )));
        }
        for (p, f) in factors.iter().enumerate() {
            let k = partition.rank(p);
            let want_u = (partition.members(p).len(), k);
            if f.u.shape() != want_u {
                return Err(Error::ShapeMismatch {
                    expected: want_u,
                    actual: f.u.shape(),
                });
            }
            if f.v.shape() != (dim, k) {
                return Err(Error::ShapeMismatch {
                    expected: (dim, k),
                    actual: f.v.shape(),
                });
            }
        }
        Ok(Self {
            partition,
            factors,
            dim,
        })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn factors(&self) -> &[QuantizedFactor] {
        &self.factors
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.partition.num_tokens(), self.dim)
    }

    /// Total storage in bits across all factor matrices.
    pub fn storage_bits(&self) -> u64 {
        self.factors
            .iter()
            .map(|f| f.u.storage_bits() + f.v.storage_bits())
            .sum()
    }

    /// Full-precision model with every factor decoded.
    pub fn dequantized(&self) -> BlockLowRankModel {
        let factors = self
            .factors
            .iter()
            .map(|f| FactorPair {
                u: dequantize(&f.u),
                v: dequantize(&f.v),
            })
            .collect();
        BlockLowRankModel::new(self.partition.clone(), factors, self.dim)
            .expect("shapes validated on construction")
    }

    pub fn reconstruct_full(&self) -> Matrix {
        self.dequantized().reconstruct_full()
    }
}

/// Quantizes every `U^p` and `V^p` independently with its own range.
pub fn quantize_model(model: &BlockLowRankModel, bits: u32) -> Result<QuantizedBlockModel> {
    check_bits(bits)?;
    let factors = model
        .factors()
        .iter()
        .map(|f| {
            Ok(QuantizedFactor {
                u: quantize_uniform(&f.u, bits)?,
                v: quantize_uniform(&f.v, bits)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QuantizedBlockModel::new(model.partition().clone(), factors, model.dims().1)
}
