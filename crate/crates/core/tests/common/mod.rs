#![allow(dead_code)]

use groupreduce::{FrequencyTable, Matrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Zipfian weights `1 / rank` over a random permutation of the rows.
pub fn zipf_weights(rng: &mut ChaCha8Rng, n: usize) -> FrequencyTable {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut q = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        q[i] = 1000.0 / (rank + 1) as f64;
    }
    FrequencyTable::new(q).unwrap()
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

/// Singular values from the eigenvalues of `A^T A` (or `A A^T`), descending.
pub fn eig_singular_values(m: &Matrix) -> Vec<f64> {
    let a = to_na(m);
    let g = if m.rows() >= m.cols() {
        a.transpose() * &a
    } else {
        &a * a.transpose()
    };
    let mut s: Vec<f64> = g
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `sum_i q_i ||A_i - B_i||^2` by direct summation.
pub fn brute_weighted(a: &Matrix, b: &Matrix, q: &FrequencyTable) -> f64 {
    (0..a.rows())
        .map(|i| {
            let d: f64 = a
                .row(i)
                .iter()
                .zip(b.row(i))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            q.get(i) * d
        })
        .sum()
}

pub fn relative_diff(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}
