//! Frequency-weighted block low-rank compression for embedding and softmax
//! matrices.
//!
//! Rows of an `N x D` matrix are grouped into clusters by token frequency,
//! each cluster gets a weighted low-rank factorization whose rank grows with
//! the cluster's mean frequency, and rows are then moved between clusters
//! whenever another cluster's basis reconstructs them better.
//!
//! # Modules
//!
//! - [`numlin`] -- dense matrix container, truncated SVD, projection residuals
//! - [`compressor`] -- weighted low-rank, frequency partitioning, rank assignment, refinement
//! - [`baselines`] -- plain SVD, magnitude pruning, uniform quantization
//! - [`metrics`] -- objectives, memory accounting, diagnostic curves, synthetic data, ablation
//! - [`io`] -- binary matrix/model formats, frequency files, CSV, command line
//!
//! # Feature flags
//!
//! - **`parallel`** *(default)* -- per-cluster fits, residual scans and ablation
//!   rows run on the rayon pool. Without it everything runs sequentially; results
//!   are bit-identical either way.

pub mod baselines;
pub mod compressor;
pub mod error;
pub mod io;
pub mod metrics;
pub mod numlin;
mod par;

pub use baselines::{
    dequantize, lowrank_baseline, prune, prune_to_budget, quantize_model, quantize_uniform,
    PrunedMatrix, QuantizedBlockModel, QuantizedMatrix,
};
pub use compressor::{
    assign_ranks, fit_blocks, group_reduce, init_partition_by_frequency, rank_budget_solve,
    rank_budget_solve_fine, refine, refine_traced, weighted_lowrank, BlockLowRankModel,
    BlockPartition, Clustering, FrequencyTable, RankSpec, RefineConfig, RefineStep,
};
pub use error::{Error, Result};
pub use metrics::{MemoryFootprint, MemoryReport};
pub use numlin::{
    frobenius_error, project_residual, svd_truncated, EmbeddingMatrix, FactorPair, Matrix,
    SvdResult,
};
