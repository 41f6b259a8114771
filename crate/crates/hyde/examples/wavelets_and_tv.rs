//! The shared numerical kernels on their own: wavelet analysis/synthesis
//! with soft thresholding, and split-Bregman total-variation denoising.
//!
//! ```bash
//! cargo run -p hyde --example wavelets_and_tv
//! ```

use ndarray::Array2;

use hyde::rng::{Stream, StreamId};
use hyde::transforms::{
    dwt2, idwt2, soft_threshold_scalar, split_bregman_tv, total_variation, tv_objective, Wavelet,
};

fn main() -> hyde::Result<()> {
    let mut rng = Stream::new(5, StreamId::Synth);

    // A piecewise-constant image under Gaussian noise.
    let clean = Array2::from_shape_fn((64, 64), |(r, c)| {
        if (r / 16 + c / 16) % 2 == 0 {
            0.25
        } else {
            0.75
        }
    });
    let noisy = clean.mapv(|v| v + 0.1 * rng.gaussian());

    // Wavelet shrinkage: transform, soft-threshold the details, invert.
    let mut coeffs = dwt2(&noisy, 2, Wavelet::Db8)?;
    let sigma = 0.1;
    let threshold = sigma * (2.0 * (noisy.len() as f64).ln()).sqrt();
    for level in &mut coeffs.details {
        for band in level {
            band.mapv_inplace(|x| soft_threshold_scalar(x, threshold));
        }
    }
    let shrunk = idwt2(&coeffs)?;

    // Total-variation denoising of the same image.
    let tv_out = split_bregman_tv(&noisy, 0.15, 40, 1e-4)?;

    let mse = |a: &Array2<f64>| -> f64 {
        a.iter()
            .zip(clean.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / a.len() as f64
    };
    println!("noisy MSE              {:.5}", mse(&noisy));
    println!("wavelet shrinkage MSE  {:.5}", mse(&shrunk));
    println!("split-Bregman TV MSE   {:.5}", mse(&tv_out));
    println!(
        "TV: {:.1} (noisy) -> {:.1} (denoised); objective {:.2} -> {:.2}",
        total_variation(&noisy),
        total_variation(&tv_out),
        tv_objective(&noisy, &noisy, 0.15),
        tv_objective(&tv_out, &noisy, 0.15),
    );

    // Sanity: the transform inverts exactly.
    let roundtrip = idwt2(&dwt2(&noisy, 3, Wavelet::Haar)?)?;
    let max_err = roundtrip
        .iter()
        .zip(noisy.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("3-level Haar round trip max error: {max_err:.2e}");
    Ok(())
}
