use super::frequency::FrequencyTable;
use super::model::{fit_cluster, BlockLowRankModel};
use crate::error::{Error, Result};
use crate::numlin::{project_residual_sq, Matrix};
use crate::par;

/// Knobs of the cluster refinement loop.
#[derive(Clone, Debug, PartialEq)]
pub struct RefineConfig {
    /// Maximum number of move/refit rounds. Zero disables refinement.
    pub max_iters: usize,
    /// Stop once fewer than this many tokens would prefer another cluster.
    pub min_candidates: usize,
    /// Fraction of the candidate set moved per round, in `(0, 1]`.
    pub move_frac: f64,
    /// Optional cap on `sum_p (|V_p| + D) k_p`. Moves into a higher-rank
    /// cluster that would exceed it are skipped.
    pub max_params: Option<u64>,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            min_candidates: 1,
            move_frac: 0.10,
            max_params: None,
        }
    }
}

impl RefineConfig {
    /// Defaults with `min_candidates = max(1, ceil(N / 1000))`.
    pub fn for_tokens(n: usize) -> Self {
        Self {
            min_candidates: n.div_ceil(1000).max(1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_candidates == 0 {
            return Err(Error::InvalidConfig(
                "min_candidates must be at least 1".into(),
            ));
        }
        if !(self.move_frac > 0.0 && self.move_frac <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "move_frac {} must lie in (0, 1]",
                self.move_frac
            )));
        }
        Ok(())
    }
}

/// One executed token move. Residuals are `||A_i - V V^T A_i||` against the
/// source and destination bases at decision time.
#[derive(Clone, Debug, PartialEq)]
pub struct Move {
    pub token: usize,
    pub from: usize,
    pub to: usize,
    pub residual_from: f64,
    pub residual_to: f64,
}

/// What happened in one refinement round.
#[derive(Clone, Debug, PartialEq)]
pub struct RefineStep {
    /// 1-based round number.
    pub iteration: usize,
    /// Size of the candidate set before selection.
    pub candidates: usize,
    pub moves: Vec<Move>,
    /// Weighted objective after refitting the changed clusters.
    pub objective: f64,
    pub parameter_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// `max_iters` was zero.
    Disabled,
    MaxIterations,
    /// Fewer candidates than `min_candidates`.
    TooFewCandidates,
    /// Candidates existed but every move was blocked by the size or budget
    /// constraints.
    NoFeasibleMove,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineSummary {
    pub iterations: usize,
    pub total_moves: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub stop: StopReason,
}

/// Moves tokens to the cluster whose basis reconstructs them best and refits
/// the clusters that changed. See [`refine_traced`].
pub fn refine(
    a: &Matrix,
    q: &FrequencyTable,
    model: BlockLowRankModel,
    cfg: &RefineConfig,
) -> Result<BlockLowRankModel> {
    refine_traced(a, q, model, cfg, |_, _| {}).map(|(m, _)| m)
}

struct Scan {
    home: f64,
    best: usize,
    best_residual: f64,
}

/// Refinement loop with a per-round observer.
///
/// Each round scores every token against every cluster basis, collects the
/// tokens whose best cluster strictly beats their current one, moves the
/// `ceil(move_frac * |M|)` of them with the smallest best residual, and
/// refits the touched clusters at their original ranks. A move is skipped if
/// it would leave its source cluster with fewer rows than the cluster's rank
/// (in particular, empty) or break `max_params`.
///
/// The weighted objective never increases: a moved token's error under the
/// old bases strictly drops, and refitting a cluster is optimal for its new
/// membership.
pub fn refine_traced<F>(
    a: &Matrix,
    q: &FrequencyTable,
    mut model: BlockLowRankModel,
    cfg: &RefineConfig,
    mut observer: F,
) -> Result<(BlockLowRankModel, RefineSummary)>
where
    F: FnMut(&RefineStep, &BlockLowRankModel),
{
    cfg.validate()?;
    model.check_inputs(a, q)?;
    let initial_objective = model.weighted_objective(a, q)?;
    let mut summary = RefineSummary {
        iterations: 0,
        total_moves: 0,
        initial_objective,
        final_objective: initial_objective,
        stop: StopReason::Disabled,
    };
    if cfg.max_iters == 0 {
        return Ok((model, summary));
    }
    let n = model.dims().0;
    let mut cost = model.parameter_count();
    summary.stop = StopReason::MaxIterations;

    for iteration in 1..=cfg.max_iters {
        let scans = {
            let partition = model.partition();
            let factors = model.factors();
            par::map_range(n, |i| {
                let row = a.row(i);
                let mut best = 0;
                let mut best_residual = f64::INFINITY;
                let mut home = f64::INFINITY;
                let home_cluster = partition.cluster_of(i);
                for (p, f) in factors.iter().enumerate() {
                    let r = project_residual_sq(row, &f.v).expect("basis has D rows");
                    if r < best_residual {
                        best_residual = r;
                        best = p;
                    }
                    if p == home_cluster {
                        home = r;
                    }
                }
                Scan {
                    home,
                    best,
                    best_residual,
                }
            })
        };

        let partition = model.partition();
        let mut sizes = partition.clustering().sizes();
        let ranks = partition.ranks().to_vec();
        // Ties with the home cluster are not moves: only strict improvements count.
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&i| {
                let s = &scans[i];
                let home = partition.cluster_of(i);
                s.best != home && s.best_residual < s.home && sizes[home] > ranks[home]
            })
            .collect();
        if candidates.len() < cfg.min_candidates {
            summary.stop = StopReason::TooFewCandidates;
            break;
        }
        candidates.sort_by(|&x, &y| {
            scans[x]
                .best_residual
                .total_cmp(&scans[y].best_residual)
                .then(x.cmp(&y))
        });
        let quota = (cfg.move_frac * candidates.len() as f64).ceil() as usize;

        let mut moves = Vec::with_capacity(quota);
        for &i in &candidates {
            if moves.len() == quota {
                break;
            }
            let from = partition.cluster_of(i);
            let to = scans[i].best;
            if sizes[from] <= ranks[from] {
                continue;
            }
            let delta = ranks[to] as i64 - ranks[from] as i64;
            if let Some(cap) = cfg.max_params {
                if delta > 0 && cost + delta as u64 > cap {
                    continue;
                }
            }
            sizes[from] -= 1;
            sizes[to] += 1;
            cost = (cost as i64 + delta) as u64;
            moves.push(Move {
                token: i,
                from,
                to,
                residual_from: scans[i].home.sqrt(),
                residual_to: scans[i].best_residual.sqrt(),
            });
        }
        if moves.is_empty() {
            summary.stop = StopReason::NoFeasibleMove;
            break;
        }

        let mut changed = vec![false; partition.num_clusters()];
        {
            let (partition, _) = model.parts_mut();
            for mv in &moves {
                partition.clustering_mut().move_token(mv.token, mv.to);
                changed[mv.from] = true;
                changed[mv.to] = true;
            }
        }
        let touched: Vec<usize> = (0..changed.len()).filter(|&p| changed[p]).collect();
        let refits = {
            let partition = model.partition();
            par::map_slice(&touched, |&p| fit_cluster(a, q, partition, p))
        };
        {
            let (_, factors) = model.parts_mut();
            for (&p, fit) in touched.iter().zip(refits) {
                factors[p] = fit?;
            }
        }

        let objective = model.weighted_objective(a, q)?;
        summary.iterations = iteration;
        summary.total_moves += moves.len();
        summary.final_objective = objective;
        let step = RefineStep {
            iteration,
            candidates: candidates.len(),
            moves,
            objective,
            parameter_count: cost,
        };
        debug_assert_eq!(cost, model.parameter_count());
        observer(&step, &model);
    }
    Ok((model, summary))
}
