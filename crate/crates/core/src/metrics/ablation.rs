use std::fmt;

use crate::baselines::lowrank_baseline;
use crate::compressor::{
    assign_ranks_scaled, fit_blocks, init_partition_by_frequency, rank_budget_solve_fine, refine,
    weighted_lowrank, BlockLowRankModel, BlockPartition, Clustering, FrequencyTable, RefineConfig,
};
use crate::error::{Error, Result};
use crate::numlin::{frobenius_error, FactorPair, Matrix};
use crate::par;

/// The five strategies, each adding one ingredient to the previous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    VanillaSvd,
    Weighted,
    Block,
    BlockDynamicRank,
    Refined,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::VanillaSvd,
        Strategy::Weighted,
        Strategy::Block,
        Strategy::BlockDynamicRank,
        Strategy::Refined,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::VanillaSvd => "vanilla-svd",
            Strategy::Weighted => "weighted",
            Strategy::Block => "block",
            Strategy::BlockDynamicRank => "block-dynamic-rank",
            Strategy::Refined => "refined",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub strategy: Strategy,
    pub parameter_count: u64,
    /// Frequency-weighted squared error.
    pub weighted_error: f64,
    /// Plain squared Frobenius error.
    pub unweighted_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationReport {
    pub budget: u64,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// `(max - min) / max` over the rows' parameter counts.
    pub fn budget_spread(&self) -> f64 {
        let max = self
            .rows
            .iter()
            .map(|r| r.parameter_count)
            .max()
            .unwrap_or(0);
        let min = self
            .rows
            .iter()
            .map(|r| r.parameter_count)
            .min()
            .unwrap_or(0);
        if max == 0 {
            0.0
        } else {
            (max - min) as f64 / max as f64
        }
    }

    pub fn row(&self, strategy: Strategy) -> &AblationRow {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy)
            .expect("every strategy has a row")
    }
}

fn single_block(n: usize, k: usize, dim: usize) -> Result<BlockPartition> {
    let clustering = Clustering::from_members(vec![(0..n).collect()], n)?;
    BlockPartition::new(clustering, vec![k], dim)
}

fn score(
    strategy: Strategy,
    a: &Matrix,
    q: &FrequencyTable,
    model: &BlockLowRankModel,
) -> Result<AblationRow> {
    Ok(AblationRow {
        strategy,
        parameter_count: model.parameter_count(),
        weighted_error: model.weighted_objective(a, q)?,
        unweighted_error: frobenius_error(a, &model.reconstruct_full())?.powi(2),
    })
}

/// Runs the five strategies at a matched parameter budget.
///
/// Rows 1-2 use the largest single-block rank and row 3 the largest uniform
/// per-cluster rank fitting `budget`. Rows 4-5 then get the tightest budget
/// actually spent by an unsaturated earlier row, so the frequency-aware
/// variants never use more parameters than the baselines they are compared
/// with. Row 5 refines row 4 under that same cap.
pub fn ablation_run(
    a: &Matrix,
    q: &FrequencyTable,
    clusters: usize,
    budget: u64,
    cfg: &RefineConfig,
) -> Result<AblationReport> {
    a.validate_embedding()?;
    q.check_len(a.rows())?;
    cfg.validate()?;
    let (n, dim) = a.shape();
    let full = n.min(dim);

    let per_rank = (n + dim) as u64;
    if budget < per_rank {
        return Err(Error::InfeasibleBudget {
            budget,
            floor: per_rank,
        });
    }
    let k_single = ((budget / per_rank) as usize).min(full);

    let clustering = init_partition_by_frequency(q, clusters)?;
    let sizes = clustering.sizes();
    let uniform_cost = |k: usize| -> u64 {
        sizes
            .iter()
            .map(|&s| ((s + dim) * k.min(s).min(dim)) as u64)
            .sum()
    };
    let k_max = sizes.iter().map(|&s| s.min(dim)).max().unwrap_or(1);
    if uniform_cost(1) > budget {
        return Err(Error::InfeasibleBudget {
            budget,
            floor: uniform_cost(1),
        });
    }
    let k_uniform = (1..=k_max)
        .take_while(|&k| uniform_cost(k) <= budget)
        .last()
        .unwrap_or(1);
    let uniform_ranks: Vec<usize> = sizes.iter().map(|&s| k_uniform.min(s).min(dim)).collect();

    let single_saturated = k_single == full;
    let uniform_saturated = k_uniform >= k_max;
    let mut matched = budget;
    if !single_saturated {
        matched = matched.min(per_rank * k_single as u64);
    }
    if !uniform_saturated {
        matched = matched.min(uniform_cost(k_uniform));
    }

    let dynamic = {
        let r = rank_budget_solve_fine(&clustering, q, dim, matched)?;
        assign_ranks_scaled(&clustering, q, r, dim)?
    };
    let uniform = BlockPartition::new(clustering, uniform_ranks, dim)?;
    let single = single_block(n, k_single, dim)?;

    let row_models = par::map_slice(&Strategy::ALL, |&s| -> Result<BlockLowRankModel> {
        match s {
            Strategy::VanillaSvd => {
                let f: FactorPair = lowrank_baseline(a, k_single)?;
                BlockLowRankModel::new(single.clone(), vec![f], dim)
            }
            Strategy::Weighted => {
                let f = weighted_lowrank(a, q.as_slice(), k_single)?;
                BlockLowRankModel::new(single.clone(), vec![f], dim)
            }
            Strategy::Block => fit_blocks(a, &uniform, q),
            Strategy::BlockDynamicRank => fit_blocks(a, &dynamic, q),
            Strategy::Refined => {
                let start = fit_blocks(a, &dynamic, q)?;
                let cfg = RefineConfig {
                    max_params: Some(cfg.max_params.unwrap_or(matched).min(matched)),
                    ..cfg.clone()
                };
                refine(a, q, start, &cfg)
            }
        }
    });
    let mut rows = Vec::with_capacity(5);
    for (s, model) in Strategy::ALL.iter().zip(row_models) {
        rows.push(score(*s, a, q, &model?)?);
    }
    Ok(AblationReport { budget, rows })
}
