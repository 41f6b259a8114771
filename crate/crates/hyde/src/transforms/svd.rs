//! Economy SVD with a deterministic sign convention.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{HydeError, Result};

/// Thin SVD `A = U diag(s) V^T` with `k = min(m, n)` columns.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `m x k`, column-orthonormal.
    pub u: Array2<f64>,
    /// Singular values, non-increasing and non-negative.
    pub s: Vec<f64>,
    /// `n x k`, column-orthonormal.
    pub v: Array2<f64>,
}

pub(crate) fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    let (m, n) = a.dim();
    DMatrix::from_fn(m, n, |r, c| a[(r, c)])
}

pub(crate) fn to_ndarray(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(r, c)| a[(r, c)])
}

/// Economy SVD. Columns are sign-fixed so the largest-magnitude entry of each
/// left singular vector is positive, giving identical factors across runs and
/// platforms.
pub fn svd_econ(matrix: &Array2<f64>) -> Result<SvdResult> {
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(HydeError::Data("non-finite value in SVD input".into()));
    }
    let (m, n) = matrix.dim();
    if m == 0 || n == 0 {
        return Err(HydeError::Parameter("SVD input must be non-empty".into()));
    }
    let a = to_nalgebra(matrix);

    // Tall matrices go through a thin QR first; the SVD then runs on the
    // small n x n factor.
    let (q, svd) = if m > 2 * n {
        let qr = a.qr();
        let q = qr.q();
        let r = qr.r();
        (Some(q), r.svd(true, true))
    } else {
        (None, a.svd(true, true))
    };

    let mut u = svd
        .u
        .ok_or_else(|| HydeError::Data("SVD failed to produce U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| HydeError::Data("SVD failed to produce V^T".into()))?;
    let mut v = v_t.transpose();
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    if let Some(q) = q {
        u = q * u;
    }

    // Order by descending singular value (nalgebra does not guarantee it).
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).expect("singular values are finite"));
    let mut u_sorted = DMatrix::zeros(u.nrows(), k);
    let mut v_sorted = DMatrix::zeros(v.nrows(), k);
    let mut s_sorted = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v.column(src));
        s_sorted.push(s[src]);
    }
    u = u_sorted;
    v = v_sorted;
    s = s_sorted;

    // Sign convention: largest-magnitude element of each u column positive.
    for c in 0..k {
        let col = u.column(c);
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if u[(best, c)] < 0.0 {
            for i in 0..u.nrows() {
                u[(i, c)] = -u[(i, c)];
            }
            for i in 0..v.nrows() {
                v[(i, c)] = -v[(i, c)];
            }
        }
    }

    Ok(SvdResult {
        u: to_ndarray(&u),
        s,
        v: to_ndarray(&v),
    })
}

impl SvdResult {
    /// Reconstruct `U diag(s) V^T` using the leading `rank` components.
    pub fn reconstruct(&self, rank: usize) -> Array2<f64> {
        let rank = rank.min(self.s.len());
        let (m, _) = self.u.dim();
        let (n, _) = self.v.dim();
        let mut out = Array2::zeros((m, n));
        for c in 0..rank {
            let sv = self.s[c];
            for i in 0..m {
                let ui = self.u[(i, c)] * sv;
                for j in 0..n {
                    out[(i, j)] += ui * self.v[(j, c)];
                }
            }
        }
        out
    }
}
