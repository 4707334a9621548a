//! Objectives, memory accounting, diagnostic curves, synthetic Zipfian
//! instances and the strategy ablation harness.

mod ablation;
mod curves;
mod memory;
mod synth;

pub use ablation::{ablation_run, AblationReport, AblationRow, Strategy};
pub use curves::{error_curve, loglog_slope, spectrum, zipf_stats};
pub use memory::{dense_footprint, MemoryFootprint, MemoryReport};
pub use synth::{gen_zipf_embedding, ZipfInstance, SCATTERED_FRACTION};

use crate::compressor::{BlockLowRankModel, FrequencyTable};
use crate::error::Result;
use crate::numlin::Matrix;

/// `sum_p ||Q_p A_p - Q_p U^p (V^p)^T||_F^2`, i.e. `sum_i q_i ||A_i - \hat A_i||^2`.
pub fn weighted_objective(
    a: &Matrix,
    q: &FrequencyTable,
    model: &BlockLowRankModel,
) -> Result<f64> {
    model.weighted_objective(a, q)
}
