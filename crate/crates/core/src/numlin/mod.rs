//! Dense matrices and the deterministic SVD / projection primitives every
//! compressor is built on. All arithmetic is in `f64`.

mod matrix;
mod svd;

pub use matrix::{EmbeddingMatrix, Matrix};
pub use svd::{
    frobenius_error, project_residual, project_residual_sq, singular_values, svd_truncated,
    FactorPair, SvdResult,
};
