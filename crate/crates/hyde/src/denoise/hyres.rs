//! HyRes: parameter-free restoration for Gaussian noise.
//!
//! The pipeline: estimate the noise covariance, whiten the spectral axis,
//! take the SVD of the whitened pixels-by-bands matrix, denoise each
//! eigen-image with a 2-D wavelet soft threshold at that component's
//! universal level, keep only components whose post-threshold energy clears
//! the noise floor (which fixes the rank with no user input), then invert
//! the transforms.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rayon::prelude::*;

use crate::cube::HsiCube;
use crate::denoise::subspace::{cube_to_dmatrix, dmatrix_to_cube, estimate_noise};
use crate::error::{HydeError, Result};
use crate::transforms::svd::to_nalgebra;
use crate::transforms::{dwt2, idwt2, soft_threshold_scalar, Wavelet};

const WAVELET: Wavelet = Wavelet::Db8;
const LEVELS: usize = 2;

/// Inverse square root and square root of a symmetric PSD matrix, with the
/// eigenvalues floored relative to the largest so near-singular noise
/// covariances (clean cubes) stay invertible.
fn whitening_pair(cov: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let floor = if max > 0.0 { max * 1e-12 } else { 1.0 };
    let n = cov.nrows();
    let mut inv_sqrt = DMatrix::zeros(n, n);
    let mut sqrt = DMatrix::zeros(n, n);
    for i in 0..n {
        let lam = eig.eigenvalues[i].max(floor);
        let qi = eig.eigenvectors.column(i);
        let a = 1.0 / lam.sqrt();
        let b = lam.sqrt();
        for r in 0..n {
            for c in 0..n {
                inv_sqrt[(r, c)] += a * qi[r] * qi[c];
                sqrt[(r, c)] += b * qi[r] * qi[c];
            }
        }
    }
    (inv_sqrt, sqrt)
}

/// Denoise an eigen-image: soft-threshold the detail coefficients at
/// `sigma * sqrt(2 ln n)` and report the post-threshold coefficient energy.
fn shrink_component(
    image: &Array2<f64>,
    sigma: f64,
    pixels: usize,
) -> Result<(Array2<f64>, f64, usize)> {
    let mut coeffs = dwt2(image, LEVELS, WAVELET)?;
    let t = sigma * (2.0 * (pixels as f64).ln()).sqrt();
    let mut energy: f64 = coeffs.approx.iter().map(|v| v * v).sum();
    for level in &mut coeffs.details {
        for band in level {
            band.mapv_inplace(|x| soft_threshold_scalar(x, t));
            energy += band.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let rec = idwt2(&coeffs)?;
    Ok((rec, energy, coeffs.approx.len()))
}

/// Parameter-free denoising of Gaussian noise. Output dimensions equal the
/// input's.
pub fn hyres(cube: &HsiCube) -> Result<HsiCube> {
    let (noise, noise_cov) = estimate_noise(cube)?;
    let (rows, cols, bands) = cube.dims();
    let pixels = rows * cols;
    if rows.min(cols) < (1 << LEVELS) {
        return Err(HydeError::Parameter(format!(
            "spatial dimensions {rows}x{cols} too small for the wavelet stage"
        )));
    }

    // Temporaries here are cube-sized in f64; scopes keep the peak at about
    // three of them for large scenes.
    let (white, unwhite) = whitening_pair(&to_nalgebra(&noise_cov));
    let yw = {
        let y = cube_to_dmatrix(cube);
        &y * &white
    };
    let v = {
        let svd = crate::transforms::svd_econ(&crate::transforms::svd::to_ndarray(&yw))?;
        to_nalgebra(&svd.v)
    };
    let projections = &yw * &v; // pixels x bands eigen-images
    drop(yw);

    // Component noise levels come from projecting the whitened residuals.
    let sigmas: Vec<f64> = {
        let mut nw = DMatrix::zeros(pixels, bands);
        for p in 0..pixels {
            for b in 0..bands {
                nw[(p, b)] = f64::from(noise.matrix[(p, b)]);
            }
        }
        let noise_proj = nw * &white * &v;
        (0..bands)
            .map(|c| {
                let col = noise_proj.column(c);
                (col.dot(&col) / pixels as f64).sqrt()
            })
            .collect()
    };
    drop(noise);
    drop(white);

    // Denoise eigen-images a thread-batch at a time so only a handful of
    // spatial images are in flight at once.
    let mut cleaned = DMatrix::zeros(pixels, bands);
    let mut retained = 0usize;
    let ids: Vec<usize> = (0..bands).collect();
    for chunk in ids.chunks(rayon::current_num_threads().max(1)) {
        let shrunk: Vec<(usize, Array2<f64>, f64, usize)> = chunk
            .par_iter()
            .map(|&c| {
                let img = Array2::from_shape_fn((rows, cols), |(r, cc)| {
                    projections[(r * cols + cc, c)]
                });
                shrink_component(&img, sigmas[c], pixels)
                    .map(|(rec, energy, approx_len)| (c, rec, energy, approx_len))
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, rec, energy, approx_len) in shrunk {
            // Noise floor: a pure-noise component keeps only its
            // approximation coefficients, whose expected energy is
            // approx_len * sigma^2.
            let floor = 2.0 * sigmas[c] * sigmas[c] * approx_len as f64;
            if energy > floor {
                retained += 1;
                for r in 0..rows {
                    for cc in 0..cols {
                        cleaned[(r * cols + cc, c)] = rec[(r, cc)];
                    }
                }
            }
        }
    }
    drop(projections);
    if retained == 0 {
        return Err(HydeError::Method(
            "no signal component survived the noise floor".into(),
        ));
    }

    let restored = cleaned * v.transpose() * unwhite;
    dmatrix_to_cube(&restored, cube.dims())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;
    use crate::noise::add_gaussian_noise_snr;
    use crate::synth::lowrank_cube;

    #[test]
    fn improves_psnr_on_noisy_low_rank_cube() {
        let clean = lowrank_cube(64, 64, 31, 6, 1).unwrap();
        let noisy = add_gaussian_noise_snr(&clean, 20.0, 2).unwrap();
        let denoised = hyres(&noisy).unwrap();
        assert_eq!(denoised.dims(), clean.dims());
        let before = psnr(&clean, &noisy).unwrap();
        let after = psnr(&clean, &denoised).unwrap();
        assert!(
            after >= before + 10.0,
            "PSNR gain {:.2} dB (before {before:.2}, after {after:.2})",
            after - before
        );
    }

    #[test]
    fn near_identity_on_clean_input() {
        let clean = lowrank_cube(48, 48, 20, 5, 3).unwrap();
        let out = hyres(&clean).unwrap();
        let fidelity = psnr(&clean, &out).unwrap();
        assert!(fidelity >= 45.0, "clean-input PSNR {fidelity:.2} dB");
    }

    #[test]
    fn deterministic() {
        let clean = lowrank_cube(32, 32, 12, 3, 5).unwrap();
        let noisy = add_gaussian_noise_snr(&clean, 20.0, 6).unwrap();
        let a = hyres(&noisy).unwrap();
        let b = hyres(&noisy).unwrap();
        assert!(a.bit_identical(&b));
    }
}
