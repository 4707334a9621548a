use crate::error::{Error, Result};

/// Positive per-token weights, one per matrix row.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    q: Vec<f64>,
}

impl FrequencyTable {
    /// Wraps weights as given. Every weight must be finite and strictly positive.
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = q
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self { q })
    }

    /// Raw occurrence counts; zero counts are floored to 1 so unseen tokens
    /// keep a representable row.
    pub fn from_counts(counts: &[u64]) -> Self {
        Self {
            q: counts.iter().map(|&c| c.max(1) as f64).collect(),
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self { q: vec![1.0; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.q.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.q[i]
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.q[i]).collect()
    }

    pub fn mean_of(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.q[i]).sum::<f64>() / indices.len() as f64
    }

    pub(crate) fn check_len(&self, rows: usize) -> Result<()> {
        if self.q.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: self.q.len(),
            });
        }
        Ok(())
    }
}
