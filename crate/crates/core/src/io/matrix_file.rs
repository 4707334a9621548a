use std::path::Path;

use super::{payload_len, write_atomic, ByteReader, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::numlin::Matrix;

pub const MATRIX_MAGIC: [u8; 4] = *b"GRMX";

/// Element width of a matrix payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32 = 0,
    F64 = 1,
}

impl Dtype {
    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(Error::BadDtype(other)),
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// `GRMX | version u32 | dtype u8 | rows u64 | cols u64 | row-major payload`.
/// `F32` narrows each entry.
pub fn encode_matrix(m: &Matrix, dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(25 + m.data().len() * dtype.width());
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(dtype as u8);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    match dtype {
        Dtype::F32 => m
            .data()
            .iter()
            .for_each(|&x| out.extend_from_slice(&(x as f32).to_le_bytes())),
        Dtype::F64 => m
            .data()
            .iter()
            .for_each(|&x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

/// Inverse of [`encode_matrix`]; `F32` payloads are widened to `f64`.
pub fn decode_matrix(bytes: &[u8]) -> Result<(Matrix, Dtype)> {
    let mut r = ByteReader::new(bytes);
    r.magic(MATRIX_MAGIC)?;
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::BadVersion(version));
    }
    let dtype = Dtype::from_code(r.u8("dtype")?)?;
    let rows = r.usize("rows")?;
    let cols = r.usize("cols")?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimensions { rows, cols });
    }
    let payload = r.take(
        payload_len(rows, cols, dtype.width(), "payload")?,
        "payload",
    )?;
    r.finish()?;
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    };
    let m = Matrix::new(rows, cols, data)?;
    m.ensure_finite()?;
    Ok((m, dtype))
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    decode_matrix(&std::fs::read(path)?).map(|(m, _)| m)
}

pub fn write_matrix(path: &Path, m: &Matrix, dtype: Dtype) -> Result<()> {
    write_atomic(path, &encode_matrix(m, dtype))
}
