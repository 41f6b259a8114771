//! Shared numerical kernels: 2-D wavelets, shrinkage, spectral finite
//! differences, economy SVD, and the split-Bregman total-variation solver.

pub(crate) mod svd;
mod tv;
mod wavelet;

pub use svd::{svd_econ, SvdResult};
pub use tv::{split_bregman_tv, split_bregman_tv_traced, total_variation, tv_objective};
pub use wavelet::{dwt2, dwt2_with, idwt2, Extension, Wavelet, WaveletCoeffs};

use ndarray::Array2;

use crate::error::{HydeError, Result};

/// Soft-threshold a single value: `sign(x) * max(|x| - t, 0)`.
#[inline]
pub fn soft_threshold_scalar(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Elementwise soft thresholding. `t` must be non-negative.
pub fn soft_threshold(values: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
    if !(t >= 0.0) {
        return Err(HydeError::Parameter(format!(
            "soft threshold must be non-negative, got {t}"
        )));
    }
    Ok(values.mapv(|x| soft_threshold_scalar(x, t)))
}

/// First-order difference along the column (band) axis: output column i is
/// `m[:, i+1] - m[:, i]`. With `transpose`, applies the adjoint, growing the
/// column count by one.
pub fn spectral_diff_apply(m: &Array2<f64>, transpose: bool) -> Result<Array2<f64>> {
    let (rows, cols) = m.dim();
    if !transpose {
        if cols < 2 {
            return Err(HydeError::Parameter(format!(
                "spectral difference needs at least 2 bands, got {cols}"
            )));
        }
        let mut out = Array2::zeros((rows, cols - 1));
        for r in 0..rows {
            for c in 0..cols - 1 {
                out[(r, c)] = m[(r, c + 1)] - m[(r, c)];
            }
        }
        Ok(out)
    } else {
        if cols < 1 {
            return Err(HydeError::Parameter(
                "adjoint spectral difference needs at least 1 column".into(),
            ));
        }
        let bands = cols + 1;
        let mut out = Array2::zeros((rows, bands));
        for r in 0..rows {
            out[(r, 0)] = -m[(r, 0)];
            for c in 1..bands - 1 {
                out[(r, c)] = m[(r, c - 1)] - m[(r, c)];
            }
            out[(r, bands - 1)] = m[(r, bands - 2)];
        }
        Ok(out)
    }
}

/// The `bands x bands` matrix `D^T D`: the second-difference operator on the
/// band path (used in closed-form spectral smoothing solves).
pub fn spectral_laplacian(bands: usize) -> Result<Array2<f64>> {
    if bands < 2 {
        return Err(HydeError::Parameter(format!(
            "spectral Laplacian needs at least 2 bands, got {bands}"
        )));
    }
    let mut out = Array2::zeros((bands, bands));
    for i in 0..bands {
        let diag = if i == 0 || i == bands - 1 { 1.0 } else { 2.0 };
        out[(i, i)] = diag;
        if i + 1 < bands {
            out[(i, i + 1)] = -1.0;
            out[(i + 1, i)] = -1.0;
        }
    }
    Ok(out)
}
