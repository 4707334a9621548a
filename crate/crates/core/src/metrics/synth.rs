use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::compressor::FrequencyTable;
use crate::error::{Error, Result};
use crate::numlin::Matrix;

/// A planted instance: rows drawn from per-cluster subspaces with Zipfian
/// token frequencies.
#[derive(Clone, Debug)]
pub struct ZipfInstance {
    pub matrix: Matrix,
    pub freqs: FrequencyTable,
    /// Planted cluster of every row.
    pub assignment: Vec<usize>,
    /// Orthonormal `D x r` basis of each planted subspace.
    pub bases: Vec<Matrix>,
}

/// Share of tokens whose planted cluster is drawn uniformly instead of from
/// their frequency band.
pub const SCATTERED_FRACTION: f64 = 0.2;

/// Synthetic embedding matrix with Zipfian frequencies.
///
/// Token `i` has frequency `max(1, 100 N / (i + 1))`. Each of the
/// `true_clusters` clusters owns a random orthonormal basis of rank
/// `max(1, D / (2 true_clusters))`. Token `i` belongs to cluster
/// `i * true_clusters / N` (contiguous frequency bands), except that a
/// [`SCATTERED_FRACTION`] share of tokens is placed uniformly at random.
/// Row `i` is a standard-normal combination of its cluster's basis plus
/// `noise_level` times isotropic standard-normal noise. Output is a pure
/// function of the arguments.
pub fn gen_zipf_embedding(
    n: usize,
    dim: usize,
    true_clusters: usize,
    noise_level: f64,
    seed: u64,
) -> Result<ZipfInstance> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidDimensions { rows: n, cols: dim });
    }
    if true_clusters == 0 || true_clusters > n {
        return Err(Error::ClusterCountOutOfRange {
            clusters: true_clusters,
            max: n,
        });
    }
    if dim < 2 * true_clusters {
        return Err(Error::InvalidConfig(format!(
            "dimension {dim} must be at least twice the cluster count {true_clusters}"
        )));
    }
    if !(noise_level.is_finite() && noise_level >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise level {noise_level} must be a nonnegative number"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub_rank = (dim / true_clusters / 2).max(1);

    let bases: Vec<Matrix> = (0..true_clusters)
        .map(|_| {
            let g = DMatrix::from_fn(dim, sub_rank, |_, _| rng.sample::<f64, _>(StandardNormal));
            Matrix::from_nalgebra(&g.qr().q())
        })
        .collect();
    let assignment: Vec<usize> = (0..n)
        .map(|i| {
            if rng.random::<f64>() < SCATTERED_FRACTION {
                rng.random_range(0..true_clusters)
            } else {
                i * true_clusters / n
            }
        })
        .collect();

    let mut matrix = Matrix::zeros(n, dim);
    let mut coeff = vec![0.0; sub_rank];
    for (i, &p) in assignment.iter().enumerate() {
        coeff
            .iter_mut()
            .for_each(|c| *c = rng.sample::<f64, _>(StandardNormal));
        let basis = &bases[p];
        let row = matrix.row_mut(i);
        for (j, x) in row.iter_mut().enumerate() {
            *x = basis
                .row(j)
                .iter()
                .zip(&coeff)
                .map(|(b, c)| b * c)
                .sum::<f64>();
        }
        if noise_level > 0.0 {
            for x in row.iter_mut() {
                *x += noise_level * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    let scale = 100.0 * n as f64;
    let freqs = FrequencyTable::new((0..n).map(|i| (scale / (i + 1) as f64).max(1.0)).collect())?;
    Ok(ZipfInstance {
        matrix,
        freqs,
        assignment,
        bases,
    })
}
