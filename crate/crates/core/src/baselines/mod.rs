//! Reference compressors: plain truncated SVD, magnitude pruning and uniform
//! b-bit quantization, plus quantization of block low-rank factors.

mod prune;
mod quantize;

pub use prune::{prune, prune_to_budget, PrunedMatrix};
pub use quantize::{
    dequantize, quantize_model, quantize_uniform, QuantizedBlockModel, QuantizedFactor,
    QuantizedMatrix,
};

use crate::error::Result;
use crate::numlin::{svd_truncated, FactorPair, Matrix};

/// Unweighted rank-`k` SVD with the singular values folded into `U`.
pub fn lowrank_baseline(a: &Matrix, k: usize) -> Result<FactorPair> {
    let svd = svd_truncated(a, k)?;
    let mut u = svd.u;
    for i in 0..u.rows() {
        for (x, s) in u.row_mut(i).iter_mut().zip(&svd.s) {
            *x *= s;
        }
    }
    FactorPair::new(u, svd.v)
}
