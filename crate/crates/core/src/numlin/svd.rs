use super::matrix::{dot, Matrix};
use crate::error::{Error, Result};

/// Top-`k` singular triplets of a matrix.
///
/// `u` is `n x k`, `v` is `D x k`, both with orthonormal columns; `s` holds
/// the singular values in non-increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(S) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul_transpose(&self.v)
            .expect("factor shapes agree by construction")
    }
}

/// A rank-`k` factorization `U V^T` of an `n x D` block.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    /// `n x k`.
    pub u: Matrix,
    /// `D x k`; orthonormal columns when produced by this crate.
    pub v: Matrix,
}

impl FactorPair {
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        if u.cols() != v.cols() {
            return Err(Error::DimensionMismatch {
                expected: u.cols(),
                actual: v.cols(),
            });
        }
        Ok(Self { u, v })
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.v.cols()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.u
            .matmul_transpose(&self.v)
            .expect("factor shapes agree by construction")
    }

    /// Row `j` of `U V^T`.
    pub fn reconstruct_row(&self, j: usize) -> Vec<f64> {
        let u = self.u.row(j);
        (0..self.v.rows()).map(|r| dot(u, self.v.row(r))).collect()
    }
}

/// Best rank-`k` approximation in Frobenius norm.
///
/// Computed from a full bidiagonalization-based SVD and truncated. Each
/// singular pair is sign-normalized so that the largest-magnitude entry of
/// every column of `V` is positive (first such entry on ties), which makes
/// the output reproducible bit-for-bit.
pub fn svd_truncated(a: &Matrix, k: usize) -> Result<SvdResult> {
    a.validate_embedding()?;
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { rank: k, max });
    }
    let svd = a.to_nalgebra().svd(true, true);
    let u_full = svd.u.expect("requested U");
    let vt_full = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]).then(x.cmp(&y)));
    order.truncate(k);

    let mut u = Matrix::zeros(a.rows(), k);
    let mut v = Matrix::zeros(a.cols(), k);
    let mut s = Vec::with_capacity(k);
    for (col, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        let mut best = -1.0;
        for j in 0..a.cols() {
            let m = vt_full[(src, j)].abs();
            if m > best {
                best = m;
                pivot = j;
            }
        }
        let sign = if vt_full[(src, pivot)] < 0.0 {
            -1.0
        } else {
            1.0
        };
        for j in 0..a.cols() {
            v.set(j, col, sign * vt_full[(src, j)]);
        }
        for i in 0..a.rows() {
            u.set(i, col, sign * u_full[(i, src)]);
        }
        s.push(sv[src].max(0.0));
    }
    Ok(SvdResult { u, s, v })
}

/// All `min(N, D)` singular values, non-increasing.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    a.validate_embedding()?;
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// `||A - B||_F`.
pub fn frobenius_error(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            actual: b.shape(),
        });
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// `||a - V V^T a||_2^2` for `V` with orthonormal columns.
pub fn project_residual_sq(a: &[f64], v: &Matrix) -> Result<f64> {
    if a.len() != v.rows() {
        return Err(Error::DimensionMismatch {
            expected: v.rows(),
            actual: a.len(),
        });
    }
    let k = v.cols();
    let mut coeff = vec![0.0; k];
    for (j, &x) in a.iter().enumerate() {
        for (c, &b) in coeff.iter_mut().zip(v.row(j)) {
            *c += b * x;
        }
    }
    let mut out = 0.0;
    for (j, &x) in a.iter().enumerate() {
        let r = x - dot(v.row(j), &coeff);
        out += r * r;
    }
    let norm_sq = dot(a, a);
    Ok(out.min(norm_sq))
}

/// `||a - V V^T a||_2`, always in `[0, ||a||_2]`.
pub fn project_residual(a: &[f64], v: &Matrix) -> Result<f64> {
    project_residual_sq(a, v).map(f64::sqrt)
}
