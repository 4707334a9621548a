use std::fmt;

use crate::baselines::{PrunedMatrix, QuantizedBlockModel, QuantizedMatrix};
use crate::compressor::BlockLowRankModel;
use crate::numlin::{FactorPair, Matrix};

/// Storage cost in units of 32-bit parameters, kept as an exact bit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryReport {
    /// Total storage, counting every stored float as 32 bits.
    pub parameter_bits: u64,
    /// `N * D` of the dense original.
    pub dense_parameters: u64,
}

impl MemoryReport {
    pub fn from_parameters(parameters: u64, dense_parameters: u64) -> Self {
        Self {
            parameter_bits: parameters * 32,
            dense_parameters,
        }
    }

    /// Equivalent 32-bit parameter count (fractional for sub-word codes).
    pub fn parameter_count(&self) -> f64 {
        self.parameter_bits as f64 / 32.0
    }

    /// Parameter count when it is a whole number of 32-bit words.
    pub fn whole_parameters(&self) -> Option<u64> {
        self.parameter_bits
            .is_multiple_of(32)
            .then_some(self.parameter_bits / 32)
    }

    pub fn bytes(&self) -> f64 {
        self.parameter_bits as f64 / 8.0
    }

    pub fn mebibytes(&self) -> f64 {
        self.bytes() / (1024.0 * 1024.0)
    }

    /// Dense parameter count over compressed parameter count.
    pub fn compression_rate(&self) -> f64 {
        (self.dense_parameters as f64 * 32.0) / self.parameter_bits as f64
    }
}

impl fmt::Display for MemoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "parameters:        {}", self.parameter_count())?;
        writeln!(f, "bytes (32-bit):    {}", self.bytes())?;
        writeln!(f, "dense parameters:  {}", self.dense_parameters)?;
        write!(f, "compression rate:  {}", self.compression_rate())
    }
}

pub trait MemoryFootprint {
    fn memory_footprint(&self) -> MemoryReport;
}

pub fn dense_footprint(rows: usize, cols: usize) -> MemoryReport {
    let n = (rows * cols) as u64;
    MemoryReport::from_parameters(n, n)
}

impl MemoryFootprint for Matrix {
    fn memory_footprint(&self) -> MemoryReport {
        dense_footprint(self.rows(), self.cols())
    }
}

/// `sum_p (|V_p| + D) * k_p`.
impl MemoryFootprint for BlockLowRankModel {
    fn memory_footprint(&self) -> MemoryReport {
        let (n, d) = self.dims();
        MemoryReport::from_parameters(self.parameter_count(), (n * d) as u64)
    }
}

/// `(n + D) * k` for a single factorization of an `n x D` matrix.
impl MemoryFootprint for FactorPair {
    fn memory_footprint(&self) -> MemoryReport {
        let (n, d, k) = (self.u.rows(), self.v.rows(), self.rank());
        MemoryReport::from_parameters(((n + d) * k) as u64, (n * d) as u64)
    }
}

/// Two parameters per stored nonzero.
impl MemoryFootprint for PrunedMatrix {
    fn memory_footprint(&self) -> MemoryReport {
        MemoryReport::from_parameters(self.parameter_count(), (self.rows * self.cols) as u64)
    }
}

/// `b/32` of a parameter per code plus two range scalars.
impl MemoryFootprint for QuantizedMatrix {
    fn memory_footprint(&self) -> MemoryReport {
        let (r, c) = self.shape();
        MemoryReport {
            parameter_bits: self.storage_bits(),
            dense_parameters: (r * c) as u64,
        }
    }
}

impl MemoryFootprint for QuantizedBlockModel {
    fn memory_footprint(&self) -> MemoryReport {
        let (n, d) = self.dims();
        MemoryReport {
            parameter_bits: self.storage_bits(),
            dense_parameters: (n * d) as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compressor::{fit_blocks, BlockPartition, Clustering, FrequencyTable};

    #[test]
    fn two_cluster_closed_form() {
        let a = Matrix::from_fn(10, 4, |i, j| ((i * 3 + j * 5) % 7) as f64);
        let c = Clustering::from_members(vec![(0..5).collect(), (5..10).collect()], 10).unwrap();
        let p = BlockPartition::new(c, vec![2, 1], 4).unwrap();
        let m = fit_blocks(&a, &p, &FrequencyTable::uniform(10)).unwrap();
        let r = m.memory_footprint();
        assert_eq!(r.whole_parameters(), Some(27));
        assert_eq!(r.compression_rate(), 40.0 / 27.0);
    }

    #[test]
    fn dense_embedding_bytes() {
        let r = dense_footprint(10_000, 200);
        assert_eq!(r.whole_parameters(), Some(2_000_000));
        assert_eq!(r.bytes(), 8_000_000.0);
        assert_eq!(r.compression_rate(), 1.0);
    }
}
