use super::frequency::FrequencyTable;
use super::partition::BlockPartition;
use super::weighted::weighted_lowrank;
use crate::error::{Error, Result};
use crate::numlin::{FactorPair, Matrix};
use crate::par;

/// Block low-rank representation `A_{V_p} ~ U^p (V^p)^T`, one factor pair per
/// cluster of the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLowRankModel {
    partition: BlockPartition,
    factors: Vec<FactorPair>,
    dim: usize,
}

impl BlockLowRankModel {
    /// Assembles a model, checking every factor's shape against the partition.
    pub fn new(partition: BlockPartition, factors: Vec<FactorPair>, dim: usize) -> Result<Self> {
        let model = Self {
            partition,
            factors,
            dim,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.partition.validate(self.dim)?;
        if self.factors.len() != self.partition.num_clusters() {
            return Err(Error::InvalidPartition(format!(
                "{} factor pairs for {} clusters",
                self.factors.len(),
                self.partition.num_clusters()
            )));
        }
        for (p, f) in self.factors.iter().enumerate() {
            let n = self.partition.members(p).len();
            let k = self.partition.rank(p);
            if f.u.shape() != (n, k) {
                return Err(Error::ShapeMismatch {
                    expected: (n, k),
                    actual: f.u.shape(),
                });
            }
            if f.v.shape() != (self.dim, k) {
                return Err(Error::ShapeMismatch {
                    expected: (self.dim, k),
                    actual: f.v.shape(),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    #[inline]
    pub fn factors(&self) -> &[FactorPair] {
        &self.factors
    }

    #[inline]
    pub fn factor(&self, cluster: usize) -> &FactorPair {
        &self.factors[cluster]
    }

    /// `(N, D)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.partition.num_tokens(), self.dim)
    }

    /// `sum_p (|V_p| + D) * k_p`.
    pub fn parameter_count(&self) -> u64 {
        self.partition.parameter_count(self.dim)
    }

    /// Row `i` of the approximation: `U^p_j (V^p)^T` with `p` the cluster of
    /// `i` and `j` its row inside the cluster.
    pub fn reconstruct_row(&self, token: usize) -> Result<Vec<f64>> {
        let n = self.partition.num_tokens();
        if token >= n {
            return Err(Error::IndexOutOfRange {
                index: token,
                len: n,
            });
        }
        let p = self.partition.cluster_of(token);
        let j = self.partition.clustering().local_index(token);
        Ok(self.factors[p].reconstruct_row(j))
    }

    /// Dense `N x D` approximation.
    pub fn reconstruct_full(&self) -> Matrix {
        let (n, d) = self.dims();
        let mut out = Matrix::zeros(n, d);
        let blocks = par::map_slice(&self.factors, FactorPair::reconstruct);
        for (p, block) in blocks.iter().enumerate() {
            for (j, &i) in self.partition.members(p).iter().enumerate() {
                out.row_mut(i).copy_from_slice(block.row(j));
            }
        }
        out
    }

    /// `sum_{i in V_p} q_i ||A_i - U^p_j (V^p)^T||^2` for one cluster.
    pub fn cluster_objective(&self, a: &Matrix, q: &FrequencyTable, cluster: usize) -> f64 {
        let f = &self.factors[cluster];
        let mut total = 0.0;
        for (j, &i) in self.partition.members(cluster).iter().enumerate() {
            let approx = f.reconstruct_row(j);
            let err: f64 = a
                .row(i)
                .iter()
                .zip(&approx)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            total += q.get(i) * err;
        }
        total
    }

    /// Frequency-weighted squared reconstruction error summed over clusters.
    pub fn weighted_objective(&self, a: &Matrix, q: &FrequencyTable) -> Result<f64> {
        self.check_inputs(a, q)?;
        let per_cluster = par::map_range(self.factors.len(), |p| self.cluster_objective(a, q, p));
        Ok(per_cluster.iter().sum())
    }

    /// Copy whose factor entries are rounded to `f32`, i.e. what a saved
    /// model file holds.
    pub fn narrowed_to_f32(&self) -> Self {
        let narrow = |m: &Matrix| {
            Matrix::new(
                m.rows(),
                m.cols(),
                m.data().iter().map(|&x| x as f32 as f64).collect(),
            )
            .expect("same shape")
        };
        Self {
            partition: self.partition.clone(),
            factors: self
                .factors
                .iter()
                .map(|f| FactorPair {
                    u: narrow(&f.u),
                    v: narrow(&f.v),
                })
                .collect(),
            dim: self.dim,
        }
    }

    pub(crate) fn check_inputs(&self, a: &Matrix, q: &FrequencyTable) -> Result<()> {
        if a.shape() != self.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                actual: a.shape(),
            });
        }
        q.check_len(a.rows())
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut BlockPartition, &mut Vec<FactorPair>) {
        (&mut self.partition, &mut self.factors)
    }

    #[cfg(test)]
    pub(crate) fn into_parts(self) -> (BlockPartition, Vec<FactorPair>) {
        (self.partition, self.factors)
    }
}

pub(crate) fn fit_cluster(
    a: &Matrix,
    q: &FrequencyTable,
    partition: &BlockPartition,
    cluster: usize,
) -> Result<FactorPair> {
    let members = partition.members(cluster);
    weighted_lowrank(
        &a.select_rows(members),
        &q.subset(members),
        partition.rank(cluster),
    )
}

/// Weighted low-rank factorization of every cluster at its assigned rank.
/// Clusters are independent; the result does not depend on evaluation order.
pub fn fit_blocks(
    a: &Matrix,
    partition: &BlockPartition,
    q: &FrequencyTable,
) -> Result<BlockLowRankModel> {
    a.validate_embedding()?;
    q.check_len(a.rows())?;
    if partition.num_tokens() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: partition.num_tokens(),
        });
    }
    partition.validate(a.cols())?;
    let factors = par::map_range(partition.num_clusters(), |p| {
        fit_cluster(a, q, partition, p)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    BlockLowRankModel::new(partition.clone(), factors, a.cols())
}
