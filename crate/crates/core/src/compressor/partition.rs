use super::frequency::FrequencyTable;
use crate::error::{Error, Result};

/// An exact partition of token indices `0..N` into nonempty clusters.
///
/// Member lists are kept sorted by token index; a token's position in its
/// cluster's list is its row in that cluster's `U` factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Clustering {
    /// Builds a clustering from member lists, checking they are disjoint,
    /// nonempty and cover `0..n`.
    pub fn from_members(mut members: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidPartition("no clusters".into()));
        }
        let mut assignment = vec![usize::MAX; n];
        for (p, list) in members.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::EmptyCluster(p));
            }
            list.sort_unstable();
            for &i in list.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "token {i} out of range for {n} rows"
                    )));
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "token {i} assigned to clusters {} and {p}",
                        assignment[i]
                    )));
                }
                assignment[i] = p;
            }
        }
        if let Some(i) = assignment.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidPartition(format!("token {i} unassigned")));
        }
        Ok(Self {
            assignment,
            members,
        })
    }

    /// Builds a clustering from a token -> cluster map with `clusters` clusters.
    pub fn from_assignment(assignment: &[usize], clusters: usize) -> Result<Self> {
        let mut members = vec![Vec::new(); clusters];
        for (i, &p) in assignment.iter().enumerate() {
            if p >= clusters {
                return Err(Error::InvalidPartition(format!(
                    "token {i} assigned to cluster {p} of {clusters}"
                )));
            }
            members[p].push(i);
        }
        Self::from_members(members, assignment.len())
    }

    #[inline]
    pub fn num_tokens(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn cluster_of(&self, token: usize) -> usize {
        self.assignment[token]
    }

    #[inline]
    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Row of `token` inside its cluster.
    pub fn local_index(&self, token: usize) -> usize {
        let p = self.assignment[token];
        self.members[p]
            .binary_search(&token)
            .expect("assignment and member lists agree")
    }

    /// Re-checks the partition invariants.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::from_members(self.members.clone(), self.assignment.len())?;
        if rebuilt.assignment != self.assignment {
            return Err(Error::InvalidPartition(
                "assignment disagrees with member lists".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn move_token(&mut self, token: usize, to: usize) {
        let from = self.assignment[token];
        let src = &mut self.members[from];
        let pos = src.binary_search(&token).expect("token in its cluster");
        src.remove(pos);
        let dst = &mut self.members[to];
        let pos = dst.binary_search(&token).unwrap_err();
        dst.insert(pos, token);
        self.assignment[token] = to;
    }
}

/// A clustering plus one retained rank per cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    clustering: Clustering,
    ranks: Vec<usize>,
}

impl BlockPartition {
    /// Pairs a clustering with ranks, checking `1 <= k_p <= min(|V_p|, dim)`.
    pub fn new(clustering: Clustering, ranks: Vec<usize>, dim: usize) -> Result<Self> {
        let out = Self { clustering, ranks };
        out.validate(dim)?;
        Ok(out)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.clustering.validate()?;
        if self.ranks.len() != self.clustering.num_clusters() {
            return Err(Error::InvalidPartition(format!(
                "{} ranks for {} clusters",
                self.ranks.len(),
                self.clustering.num_clusters()
            )));
        }
        for (p, &k) in self.ranks.iter().enumerate() {
            let max = self.clustering.members(p).len().min(dim);
            if k == 0 || k > max {
                return Err(Error::RankOutOfRange { rank: k, max });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub(crate) fn clustering_mut(&mut self) -> &mut Clustering {
        &mut self.clustering
    }

    #[inline]
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    #[inline]
    pub fn rank(&self, cluster: usize) -> usize {
        self.ranks[cluster]
    }

    #[inline]
    pub fn num_clusters(&self) -> usize {
        self.clustering.num_clusters()
    }

    #[inline]
    pub fn num_tokens(&self) -> usize {
        self.clustering.num_tokens()
    }

    #[inline]
    pub fn members(&self, cluster: usize) -> &[usize] {
        self.clustering.members(cluster)
    }

    #[inline]
    pub fn cluster_of(&self, token: usize) -> usize {
        self.clustering.cluster_of(token)
    }

    /// `sum_p (|V_p| + D) * k_p`.
    pub fn parameter_count(&self, dim: usize) -> u64 {
        block_cost(&self.clustering.sizes(), &self.ranks, dim)
    }
}

pub(crate) fn block_cost(sizes: &[usize], ranks: &[usize], dim: usize) -> u64 {
    sizes
        .iter()
        .zip(ranks)
        .map(|(&n, &k)| ((n + dim) * k) as u64)
        .sum()
}

/// Sorts tokens by descending frequency (ties by ascending index) and cuts the
/// order into `clusters` contiguous groups; the first `N mod c` groups get one
/// extra token. Cluster 0 holds the most frequent tokens.
pub fn init_partition_by_frequency(q: &FrequencyTable, clusters: usize) -> Result<Clustering> {
    let n = q.len();
    if clusters == 0 || clusters > n {
        return Err(Error::ClusterCountOutOfRange { clusters, max: n });
    }
    let w = q.as_slice();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));

    let base = n / clusters;
    let extra = n % clusters;
    let mut members = Vec::with_capacity(clusters);
    let mut start = 0;
    for p in 0..clusters {
        let len = base + usize::from(p < extra);
        members.push(order[start..start + len].to_vec());
        start += len;
    }
    Clustering::from_members(members, n)
}

struct RankInputs {
    /// Mean frequency of each cluster divided by the smallest mean.
    ratios: Vec<f64>,
    caps: Vec<usize>,
    sizes: Vec<usize>,
}

impl RankInputs {
    fn new(clustering: &Clustering, q: &FrequencyTable, dim: usize) -> Result<Self> {
        q.check_len(clustering.num_tokens())?;
        let mut means = Vec::with_capacity(clustering.num_clusters());
        for (p, m) in clustering.all_members().iter().enumerate() {
            if m.is_empty() {
                return Err(Error::EmptyCluster(p));
            }
            means.push(q.mean_of(m));
        }
        let least = means.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            ratios: means.iter().map(|m| m / least).collect(),
            caps: clustering.sizes().iter().map(|&s| s.min(dim)).collect(),
            sizes: clustering.sizes(),
        })
    }

    fn ranks(&self, base: f64) -> Vec<usize> {
        self.ratios
            .iter()
            .zip(&self.caps)
            .map(|(ratio, &cap)| {
                let k = (ratio * base).round();
                if k < 1.0 {
                    1
                } else if k >= cap as f64 {
                    cap
                } else {
                    k as usize
                }
            })
            .collect()
    }

    fn cost(&self, base: f64, dim: usize) -> u64 {
        block_cost(&self.sizes, &self.ranks(base), dim)
    }

    fn max_cap(&self) -> usize {
        self.caps.iter().copied().max().unwrap_or(1)
    }
}

/// Ranks proportional to mean cluster frequency: the least frequent cluster
/// gets `base_rank`, cluster `p` gets `round(f_p / f_min * base_rank)`,
/// clamped to `[1, min(|V_p|, dim)]`.
pub fn assign_ranks(
    clustering: &Clustering,
    q: &FrequencyTable,
    base_rank: usize,
    dim: usize,
) -> Result<BlockPartition> {
    if base_rank == 0 {
        return Err(Error::RankOutOfRange { rank: 0, max: dim });
    }
    assign_ranks_scaled(clustering, q, base_rank as f64, dim)
}

/// [`assign_ranks`] with a real-valued base rank, for finer budget matching.
pub fn assign_ranks_scaled(
    clustering: &Clustering,
    q: &FrequencyTable,
    base_rank: f64,
    dim: usize,
) -> Result<BlockPartition> {
    if !(base_rank.is_finite() && base_rank > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "base rank {base_rank} must be positive"
        )));
    }
    let inputs = RankInputs::new(clustering, q, dim)?;
    BlockPartition::new(clustering.clone(), inputs.ranks(base_rank), dim)
}

/// Largest integer base rank whose dynamic-rank assignment fits in
/// `budget_params`. If every cluster saturates at its cap within budget the
/// smallest saturating base rank is returned.
///
/// The floor is the cost at base rank 1; with uniform cluster frequencies that
/// is every cluster at rank 1.
pub fn rank_budget_solve(
    clustering: &Clustering,
    q: &FrequencyTable,
    dim: usize,
    budget_params: u64,
) -> Result<usize> {
    let inputs = RankInputs::new(clustering, q, dim)?;
    let cost = |r: usize| inputs.cost(r as f64, dim);
    let floor = cost(1);
    if budget_params < floor {
        return Err(Error::InfeasibleBudget {
            budget: budget_params,
            floor,
        });
    }
    let r_sat = inputs.max_cap();
    let saturated = cost(r_sat);
    if saturated <= budget_params {
        let (mut a, mut b) = (1usize, r_sat);
        while a < b {
            let mid = a + (b - a) / 2;
            if cost(mid) >= saturated {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        return Ok(a);
    }
    // cost(lo) <= budget < cost(hi)
    let mut lo = 1usize;
    let mut hi = 2usize;
    while hi < r_sat && cost(hi) <= budget_params {
        lo = hi;
        hi *= 2;
    }
    let mut hi = hi.min(r_sat);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cost(mid) <= budget_params {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest real base rank whose assignment fits in `budget_params`.
///
/// Ranks only change where `ratio_p * r` crosses a half-integer, so the search
/// runs over those breakpoints. The result is never below the integer answer
/// of [`rank_budget_solve`].
pub fn rank_budget_solve_fine(
    clustering: &Clustering,
    q: &FrequencyTable,
    dim: usize,
    budget_params: u64,
) -> Result<f64> {
    let base = rank_budget_solve(clustering, q, dim, budget_params)? as f64;
    let inputs = RankInputs::new(clustering, q, dim)?;
    let mut candidates = vec![base];
    for (ratio, &cap) in inputs.ratios.iter().zip(&inputs.caps) {
        for m in 2..=cap {
            let r = (m as f64 - 0.5) / ratio;
            if r > base {
                candidates.push(r);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // cost is monotone in r, so the feasible candidates form a prefix.
    let feasible = candidates.partition_point(|&r| inputs.cost(r, dim) <= budget_params);
    Ok(candidates[feasible.max(1) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freq(v: &[f64]) -> FrequencyTable {
        FrequencyTable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn equal_split_on_decreasing_frequency() {
        let q = freq(&(0..10).map(|i| (10 - i) as f64).collect::<Vec<_>>());
        let c = init_partition_by_frequency(&q, 2).unwrap();
        assert_eq!(c.members(0), &[0, 1, 2, 3, 4]);
        assert_eq!(c.members(1), &[5, 6, 7, 8, 9]);
    }

    #[test]
    fn ties_broken_by_index() {
        let c = init_partition_by_frequency(&FrequencyTable::uniform(6), 3).unwrap();
        assert_eq!(c.all_members(), &[vec![0, 1], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn ceiling_sizes_first() {
        let c = init_partition_by_frequency(&FrequencyTable::uniform(7), 3).unwrap();
        assert_eq!(c.sizes(), vec![3, 2, 2]);
    }

    #[test]
    fn most_frequent_in_cluster_zero() {
        let q = freq(&[1.0, 5.0, 3.0, 9.0]);
        let c = init_partition_by_frequency(&q, 2).unwrap();
        assert_eq!(c.members(0), &[1, 3]);
        assert_eq!(c.members(1), &[0, 2]);
    }

    #[test]
    fn cluster_count_checked() {
        let q = FrequencyTable::uniform(3);
        assert!(matches!(
            init_partition_by_frequency(&q, 0),
            Err(Error::ClusterCountOutOfRange { .. })
        ));
        assert!(init_partition_by_frequency(&q, 4).is_err());
    }

    fn three_buckets(means: [f64; 3], size: usize) -> (Clustering, FrequencyTable) {
        let mut q = Vec::new();
        for m in means {
            q.extend(std::iter::repeat_n(m, size));
        }
        let q = freq(&q);
        (init_partition_by_frequency(&q, 3).unwrap(), q)
    }

    #[test]
    fn ranks_follow_frequency_ratio() {
        let (c, q) = three_buckets([100.0, 10.0, 1.0], 1000);
        let p = assign_ranks(&c, &q, 2, 500).unwrap();
        assert_eq!(p.ranks(), &[200, 20, 2]);
    }

    #[test]
    fn equal_means_give_base_rank() {
        let (c, q) = three_buckets([4.0, 4.0, 4.0], 10);
        assert_eq!(assign_ranks(&c, &q, 3, 8).unwrap().ranks(), &[3, 3, 3]);
    }

    #[test]
    fn ranks_clamped_to_dimension() {
        let (c, q) = three_buckets([100.0, 10.0, 1.0], 1000);
        let p = assign_ranks(&c, &q, 2, 50).unwrap();
        assert_eq!(p.ranks(), &[50, 20, 2]);
    }

    #[test]
    fn budget_single_cluster() {
        let q = FrequencyTable::uniform(100);
        let c = init_partition_by_frequency(&q, 1).unwrap();
        assert_eq!(rank_budget_solve(&c, &q, 10, 440).unwrap(), 4);
        assert_eq!(rank_budget_solve(&c, &q, 10, 110).unwrap(), 1);
        assert!(matches!(
            rank_budget_solve(&c, &q, 10, 109),
            Err(Error::InfeasibleBudget {
                budget: 109,
                floor: 110
            })
        ));
    }

    #[test]
    fn budget_saturation_returns_smallest_saturating_rank() {
        let q = FrequencyTable::uniform(20);
        let c = init_partition_by_frequency(&q, 1).unwrap();
        assert_eq!(rank_budget_solve(&c, &q, 5, 1_000_000).unwrap(), 5);
    }

    #[test]
    fn moving_tokens_keeps_members_sorted() {
        let mut c = Clustering::from_assignment(&[0, 0, 1, 1, 0], 2).unwrap();
        c.move_token(4, 1);
        c.move_token(0, 1);
        assert_eq!(c.members(0), &[1]);
        assert_eq!(c.members(1), &[0, 2, 3, 4]);
        assert_eq!(c.local_index(3), 2);
        c.validate().unwrap();
    }

    #[test]
    fn from_members_rejects_overlap_and_gaps() {
        assert!(Clustering::from_members(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(Clustering::from_members(vec![vec![0], vec![2]], 3).is_err());
        assert!(matches!(
            Clustering::from_members(vec![vec![0, 1], vec![]], 2),
            Err(Error::EmptyCluster(1))
        ));
    }
}
