use super::frequency::FrequencyTable;
use super::model::{fit_blocks, BlockLowRankModel};
use super::partition::{
    assign_ranks, assign_ranks_scaled, init_partition_by_frequency, rank_budget_solve_fine,
};
use super::refine::{refine_traced, RefineConfig, RefineSummary};
use crate::error::Result;
use crate::numlin::Matrix;

/// How per-cluster ranks are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankSpec {
    /// The least frequent cluster gets this rank; others scale with mean frequency.
    BaseRank(usize),
    /// Spend at most this many 32-bit parameters. The base rank is the largest
    /// (real-valued) one that fits, and refinement is capped at the same budget
    /// unless the refine config sets its own cap.
    Budget(u64),
}

/// 5 clusters up to 50k tokens, 20 beyond.
pub fn default_cluster_count(tokens: usize) -> usize {
    if tokens <= 50_000 {
        5
    } else {
        20
    }
}

/// Frequency bucketing, dynamic ranks, per-cluster weighted fits, refinement.
pub fn group_reduce(
    a: &Matrix,
    q: &FrequencyTable,
    clusters: usize,
    ranks: RankSpec,
    cfg: &RefineConfig,
) -> Result<BlockLowRankModel> {
    group_reduce_traced(a, q, clusters, ranks, cfg).map(|(m, _)| m)
}

pub fn group_reduce_traced(
    a: &Matrix,
    q: &FrequencyTable,
    clusters: usize,
    ranks: RankSpec,
    cfg: &RefineConfig,
) -> Result<(BlockLowRankModel, RefineSummary)> {
    a.validate_embedding()?;
    q.check_len(a.rows())?;
    cfg.validate()?;
    let clustering = init_partition_by_frequency(q, clusters)?;
    let mut cfg = cfg.clone();
    let partition = match ranks {
        RankSpec::BaseRank(r) => assign_ranks(&clustering, q, r, a.cols())?,
        RankSpec::Budget(budget) => {
            let r = rank_budget_solve_fine(&clustering, q, a.cols(), budget)?;
            cfg.max_params = cfg.max_params.or(Some(budget));
            assign_ranks_scaled(&clustering, q, r, a.cols())?
        }
    };
    let model = fit_blocks(a, &partition, q)?;
    refine_traced(a, q, model, &cfg, |_, _| {})
}
