use crate::error::{Error, Result};
use crate::numlin::Matrix;

/// Sparse result of magnitude pruning. Entries are stored in row-major order
/// and are never zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
    /// Smallest magnitude that survives. `f64::INFINITY` when nothing does.
    pub threshold: f64,
}

impl PrunedMatrix {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sparse storage costs one value and one index per nonzero.
    pub fn parameter_count(&self) -> u64 {
        2 * self.entries.len() as u64
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m.set(i, j, v);
        }
        m
    }
}

/// Keeps every nonzero entry with `|a| >= threshold`.
pub fn prune(a: &Matrix, threshold: f64) -> Result<PrunedMatrix> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::NegativeThreshold(threshold));
    }
    a.ensure_finite()?;
    let cols = a.cols();
    let entries = a
        .data()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0 && v.abs() >= threshold)
        .map(|(pos, &v)| (pos / cols, pos % cols, v))
        .collect();
    Ok(PrunedMatrix {
        rows: a.rows(),
        cols,
        entries,
        threshold,
    })
}

/// Keeps the `floor(budget / 2)` largest-magnitude nonzero entries, earlier
/// row-major positions first among equal magnitudes.
pub fn prune_to_budget(a: &Matrix, budget_params: u64) -> Result<PrunedMatrix> {
    a.ensure_finite()?;
    let keep = (budget_params / 2) as usize;
    let mut order: Vec<usize> = (0..a.data().len())
        .filter(|&p| a.data()[p] != 0.0)
        .collect();
    order.sort_by(|&x, &y| {
        a.data()[y]
            .abs()
            .total_cmp(&a.data()[x].abs())
            .then(x.cmp(&y))
    });
    order.truncate(keep);
    let threshold = order.last().map_or(f64::INFINITY, |&p| a.data()[p].abs());
    order.sort_unstable();
    let cols = a.cols();
    Ok(PrunedMatrix {
        rows: a.rows(),
        cols,
        entries: order
            .into_iter()
            .map(|p| (p / cols, p % cols, a.data()[p]))
            .collect(),
        threshold,
    })
}
