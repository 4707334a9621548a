//! Frequency-weighted block low-rank compression.
//!
//! The pipeline is: bucket tokens by frequency ([`init_partition_by_frequency`]),
//! give each bucket a rank proportional to its mean frequency ([`assign_ranks`]),
//! fit a weighted low-rank factorization per bucket ([`fit_blocks`]), then move
//! tokens to whichever bucket's basis reconstructs them best ([`refine`]).
//! [`group_reduce`] runs all of it.

mod frequency;
mod model;
mod partition;
mod pipeline;
mod refine;
mod weighted;

pub use frequency::FrequencyTable;
pub use model::{fit_blocks, BlockLowRankModel};
pub use partition::{
    assign_ranks, assign_ranks_scaled, init_partition_by_frequency, rank_budget_solve,
    rank_budget_solve_fine, BlockPartition, Clustering,
};
pub use pipeline::{default_cluster_count, group_reduce, group_reduce_traced, RankSpec};
pub use refine::{
    refine, refine_traced, Move, RefineConfig, RefineStep, RefineSummary, StopReason,
};
pub use weighted::weighted_lowrank;
