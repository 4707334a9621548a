use crate::compressor::FrequencyTable;
use crate::error::{Error, Result};
use crate::numlin::{frobenius_error, singular_values, svd_truncated, Matrix};

/// Every singular value of `a`, non-increasing.
pub fn spectrum(a: &Matrix) -> Result<Vec<f64>> {
    singular_values(a)
}

/// Relative rank-`k` SVD reconstruction error `||A - A_k||_F / ||A||_F` for
/// each requested `k`. `k = 0` reports 1.
pub fn error_curve(a: &Matrix, ks: &[usize]) -> Result<Vec<(usize, f64)>> {
    a.validate_embedding()?;
    let max = a.rows().min(a.cols());
    if let Some(&k) = ks.iter().find(|&&k| k > max) {
        return Err(Error::RankOutOfRange { rank: k, max });
    }
    let norm = a.frobenius_norm();
    let top = ks.iter().copied().max().unwrap_or(0);
    if top == 0 {
        return Ok(ks.iter().map(|&k| (k, 1.0)).collect());
    }
    let svd = svd_truncated(a, top)?;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 {
            out.push((k, 1.0));
            continue;
        }
        let mut u = Matrix::zeros(a.rows(), k);
        let mut v = Matrix::zeros(a.cols(), k);
        for c in 0..k {
            for i in 0..a.rows() {
                u.set(i, c, svd.u.get(i, c) * svd.s[c]);
            }
            for j in 0..a.cols() {
                v.set(j, c, svd.v.get(j, c));
            }
        }
        let approx = u.matmul_transpose(&v)?;
        let err = frobenius_error(a, &approx)?;
        out.push((k, if norm == 0.0 { 0.0 } else { err / norm }));
    }
    Ok(out)
}

/// `(rank, ln q)` pairs with tokens sorted by descending frequency; rank is 1-based.
pub fn zipf_stats(q: &FrequencyTable) -> Vec<(usize, f64)> {
    let mut sorted = q.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, f)| (i + 1, f.ln()))
        .collect()
}

/// Least-squares slope of `ln q` against `ln rank`.
pub fn loglog_slope(stats: &[(usize, f64)]) -> f64 {
    let n = stats.len() as f64;
    let xs: Vec<f64> = stats.iter().map(|(r, _)| (*r as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = stats.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, (_, y)) in xs.iter().zip(stats) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
