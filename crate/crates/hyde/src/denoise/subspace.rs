//! Noise estimation and signal-subspace identification (HySime).
//!
//! The noise estimator regresses each band onto all the others and keeps the
//! residual; the subspace step eigendecomposes the estimated signal
//! correlation and picks the dimension whose projection-error plus
//! noise-power cost is smallest.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;

use crate::cube::{CubeMatrix, HsiCube};
use crate::error::{HydeError, Result};
use crate::transforms::svd::{to_nalgebra, to_ndarray};

/// Ridge damping applied to the normal equations of the band regressions.
const REGRESSION_RIDGE: f64 = 1e-6;

/// Output of [`hysime`].
#[derive(Debug, Clone)]
pub struct SubspaceModel {
    /// Estimated `bands x bands` noise covariance.
    pub noise_cov: Array2<f64>,
    /// `bands x k` column-orthonormal signal basis.
    pub basis: Array2<f64>,
    /// Estimated signal-subspace dimension.
    pub k: usize,
    /// Cumulative selection cost per candidate dimension; `k` is its argmin
    /// (1-based).
    pub criterion_curve: Vec<f64>,
}

pub(crate) fn cube_to_dmatrix(cube: &HsiCube) -> DMatrix<f64> {
    let (rows, cols, bands) = cube.dims();
    let pixels = rows * cols;
    let mut m = DMatrix::zeros(pixels, bands);
    for b in 0..bands {
        let band = cube.band(b);
        for p in 0..pixels {
            m[(p, b)] = f64::from(band[p]);
        }
    }
    m
}

pub(crate) fn dmatrix_to_cube(m: &DMatrix<f64>, dims: (usize, usize, usize)) -> Result<HsiCube> {
    let (rows, cols, bands) = dims;
    if m.nrows() != rows * cols || m.ncols() != bands {
        return Err(HydeError::Shape(format!(
            "matrix {}x{} does not match cube dims {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    let mut data = Vec::with_capacity(rows * cols * bands);
    for b in 0..bands {
        for p in 0..rows * cols {
            data.push(m[(p, b)] as f32);
        }
    }
    HsiCube::from_bsq(rows, cols, bands, data)
}

fn check_preconditions(cube: &HsiCube) -> Result<()> {
    if cube.bands() < 3 {
        return Err(HydeError::Parameter(format!(
            "noise estimation needs at least 3 bands, got {}",
            cube.bands()
        )));
    }
    if cube.num_pixels() <= cube.bands() {
        return Err(HydeError::Parameter(format!(
            "regression is underdetermined: {} pixels for {} bands",
            cube.num_pixels(),
            cube.bands()
        )));
    }
    Ok(())
}

/// Per-band regression residuals and their covariance `(1/N) N^T N`.
///
/// Band i is regressed on all other bands through the partitioned inverse of
/// the ridged Gram matrix, so one matrix inversion serves every band.
pub fn estimate_noise(cube: &HsiCube) -> Result<(CubeMatrix, Array2<f64>)> {
    check_preconditions(cube)?;
    let y = cube_to_dmatrix(cube);
    let pixels = y.nrows();
    let bands = y.ncols();

    let gram = y.transpose() * &y;
    let mut ridged = gram.clone();
    for i in 0..bands {
        ridged[(i, i)] += REGRESSION_RIDGE;
    }
    let ginv = ridged.clone().try_inverse().ok_or_else(|| {
        HydeError::Data("ridged Gram matrix is singular; cube may be degenerate".into())
    })?;

    let mut noise = DMatrix::zeros(pixels, bands);
    for i in 0..bands {
        // beta = (XX * gram[:, i]) with the i-th row/column deflated out.
        let gii = ginv[(i, i)];
        let gcol = ginv.column(i).clone_owned();
        let mut rhs = gram.column(i).clone_owned();
        rhs[i] = 0.0;
        let base = &ginv * &rhs;
        let corr = &gcol * (gcol.dot(&rhs) / gii);
        let mut beta: DVector<f64> = base - corr;
        beta[i] = 0.0;
        let fitted = &y * &beta;
        for p in 0..pixels {
            noise[(p, i)] = y[(p, i)] - fitted[p];
        }
    }

    let cov = (noise.transpose() * &noise) / pixels as f64;
    let residual = CubeMatrix {
        matrix: Array2::from_shape_fn((pixels, bands), |(p, b)| noise[(p, b)] as f32),
        origin_dims: cube.dims(),
    };
    Ok((residual, to_ndarray(&cov)))
}

/// Eigenvectors of a symmetric matrix, sorted by descending eigenvalue, with
/// the largest-magnitude entry of each vector made positive.
fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let mut best = 0usize;
        for i in 0..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Estimate the signal subspace of a noisy cube.
pub fn hysime(cube: &HsiCube) -> Result<SubspaceModel> {
    let (noise, noise_cov) = estimate_noise(cube)?;
    hysime_with_noise(cube, &noise, &noise_cov)
}

/// HySime with an externally supplied noise estimate (matching shapes).
pub fn hysime_with_noise(
    cube: &HsiCube,
    noise: &CubeMatrix,
    noise_cov: &Array2<f64>,
) -> Result<SubspaceModel> {
    let y = cube_to_dmatrix(cube);
    let pixels = y.nrows() as f64;
    let bands = y.ncols();
    if noise.matrix.dim() != (y.nrows(), bands) || noise_cov.dim() != (bands, bands) {
        return Err(HydeError::Shape(
            "noise estimate does not match the cube".into(),
        ));
    }

    let mut x = y.clone();
    for p in 0..y.nrows() {
        for b in 0..bands {
            x[(p, b)] -= f64::from(noise.matrix[(p, b)]);
        }
    }
    let ry = (y.transpose() * &y) / pixels;
    let rx = (x.transpose() * &x) / pixels;

    let (_, eigvecs) = sorted_symmetric_eigen(&rx);

    // Small diagonal lift keeps the noise power positive for noiseless input.
    let mut rn = to_nalgebra(noise_cov);
    let lift = rx.trace() / bands as f64 * 1e-5;
    for i in 0..bands {
        rn[(i, i)] += lift;
    }

    let mut costs: Vec<(f64, usize)> = (0..bands)
        .map(|i| {
            let e = eigvecs.column(i);
            let py = (&ry * e).dot(&e);
            let pn = (&rn * e).dot(&e);
            (-py + 2.0 * pn, i)
        })
        .collect();
    costs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("costs are finite"));

    let mut criterion_curve = Vec::with_capacity(bands);
    let mut acc = 0.0;
    for (cost, _) in &costs {
        acc += cost;
        criterion_curve.push(acc);
    }
    let k = 1 + criterion_curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("curve is finite"))
        .map(|(i, _)| i)
        .expect("bands >= 3");

    let mut basis = DMatrix::zeros(bands, k);
    for (dst, (_, src)) in costs.iter().take(k).enumerate() {
        basis.set_column(dst, &eigvecs.column(*src));
    }

    Ok(SubspaceModel {
        noise_cov: noise_cov.clone(),
        basis: to_ndarray(&basis),
        k,
        criterion_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rank-`k` cube from random smooth factors, unit-scale values.
    pub(crate) fn low_rank_cube(
        rows: usize,
        cols: usize,
        bands: usize,
        rank: usize,
        seed: u64,
    ) -> HsiCube {
        crate::synth::lowrank_cube(rows, cols, bands, rank, seed).unwrap()
    }

    #[test]
    fn pure_low_rank_cube_has_tiny_noise_estimate() {
        let cube = low_rank_cube(32, 32, 20, 3, 1);
        let (_, cov) = estimate_noise(&cube).unwrap();
        let frob: f64 = cov.iter().map(|v| v * v).sum::<f64>().sqrt();
        let power = crate::noise::signal_power(&cube);
        assert!(
            frob <= 1e-3 * power,
            "cov Frobenius {frob} vs power {power}"
        );
    }

    #[test]
    fn residuals_match_direct_ridge_regression() {
        // Oracle: solve each band's ridge regression from scratch, dropping
        // the band's own row and column, and compare residuals against the
        // partitioned-inverse path.
        let cube = low_rank_cube(12, 11, 6, 3, 17);
        let noisy = crate::noise::add_gaussian_noise_snr(&cube, 25.0, 18).unwrap();
        let (residual, _) = estimate_noise(&noisy).unwrap();

        let y = cube_to_dmatrix(&noisy);
        let (pixels, bands) = (y.nrows(), y.ncols());
        for i in 0..bands {
            let others: Vec<usize> = (0..bands).filter(|&j| j != i).collect();
            let mut yo = DMatrix::zeros(pixels, bands - 1);
            for (dst, &src) in others.iter().enumerate() {
                yo.set_column(dst, &y.column(src));
            }
            let mut normal = yo.transpose() * &yo;
            for d in 0..bands - 1 {
                normal[(d, d)] += REGRESSION_RIDGE;
            }
            let rhs = yo.transpose() * y.column(i);
            let beta = normal
                .cholesky()
                .expect("ridged normal equations are positive definite")
                .solve(&rhs);
            let fitted = &yo * beta;
            for p in 0..pixels {
                let oracle = y[(p, i)] - fitted[p];
                let fast = f64::from(residual.matrix[(p, i)]);
                assert!(
                    (oracle - fast).abs() <= 1e-5,
                    "band {i} pixel {p}: {fast} vs oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn white_noise_variance_recovered_on_diagonal() {
        let cube = low_rank_cube(64, 64, 30, 4, 2);
        let sigma = 0.02;
        let noisy = crate::noise::add_noniid_gaussian(&cube, sigma, sigma, 3).unwrap();
        let (_, cov) = estimate_noise(&noisy).unwrap();
        let mean_diag: f64 = (0..30).map(|i| cov[(i, i)]).sum::<f64>() / 30.0;
        let rel = (mean_diag - sigma * sigma).abs() / (sigma * sigma);
        assert!(rel <= 0.2, "mean diagonal {mean_diag} vs {}", sigma * sigma);
    }

    #[test]
    fn two_bands_is_parameter_error() {
        let cube = low_rank_cube(8, 8, 5, 2, 4);
        let thin = {
            let mut data = Vec::new();
            data.extend_from_slice(cube.band(0));
            data.extend_from_slice(cube.band(1));
            HsiCube::from_bsq(8, 8, 2, data).unwrap()
        };
        assert!(matches!(
            estimate_noise(&thin),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn too_few_pixels_is_parameter_error() {
        let cube = low_rank_cube(2, 2, 5, 2, 5);
        assert!(matches!(
            estimate_noise(&cube),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn hysime_recovers_planted_rank() {
        let cube = low_rank_cube(64, 64, 50, 5, 6);
        let noisy = crate::noise::add_gaussian_noise_snr(&cube, 30.0, 7).unwrap();
        let model = hysime(&noisy).unwrap();
        assert!(
            (4..=6).contains(&model.k),
            "estimated k = {} for true rank 5",
            model.k
        );
        assert_eq!(model.criterion_curve.len(), 50);
    }

    #[test]
    fn hysime_on_noiseless_rank_one() {
        let cube = low_rank_cube(24, 24, 12, 1, 8);
        let model = hysime(&cube).unwrap();
        assert_eq!(model.k, 1);
    }

    #[test]
    fn basis_is_orthonormal_and_curve_argmin_is_k() {
        let cube = low_rank_cube(48, 48, 25, 4, 9);
        let noisy = crate::noise::add_gaussian_noise_snr(&cube, 25.0, 10).unwrap();
        let model = hysime(&noisy).unwrap();
        assert!(model.k >= 1 && model.k <= 25);
        let b = &model.basis;
        for i in 0..model.k {
            for j in 0..model.k {
                let dot: f64 = (0..25).map(|r| b[(r, i)] * b[(r, j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-4, "basis^T basis ({i},{j}) = {dot}");
            }
        }
        let argmin = model
            .criterion_curve
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
            + 1;
        assert_eq!(argmin, model.k);
    }
}
