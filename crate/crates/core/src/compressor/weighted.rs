use crate::error::{Error, Result};
use crate::numlin::{svd_truncated, FactorPair, Matrix};

/// Rank-`k` minimizer of `sum_ij q_i (A_ij - U_i V_j^T)^2`.
///
/// With per-row weights the problem reduces to a plain truncated SVD of
/// `Q A`, `Q = diag(sqrt(q))`: if `QA ~ U' S' V'^T` then `U = Q^-1 U' S'` and
/// `V = V'`. `V` has orthonormal columns.
pub fn weighted_lowrank(block: &Matrix, weights: &[f64], k: usize) -> Result<FactorPair> {
    if weights.len() != block.rows() {
        return Err(Error::DimensionMismatch {
            expected: block.rows(),
            actual: weights.len(),
        });
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::InvalidWeight { index, value });
    }
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut scaled = block.clone();
    for (i, r) in roots.iter().enumerate() {
        scaled.row_mut(i).iter_mut().for_each(|x| *x *= r);
    }
    let svd = svd_truncated(&scaled, k)?;
    let mut u = svd.u;
    for (i, r) in roots.iter().enumerate() {
        for (x, s) in u.row_mut(i).iter_mut().zip(&svd.s) {
            *x = *x * s / r;
        }
    }
    FactorPair::new(u, svd.v)
}
