//! Estimate the noise statistics and signal-subspace dimension of a noisy
//! cube with HySime.
//!
//! ```bash
//! cargo run -p hyde --example subspace_estimation
//! ```

use hyde::denoise::{estimate_noise, hysime};
use hyde::noise::add_gaussian_noise_snr;
use hyde::synth::lowrank_cube;

fn main() -> hyde::Result<()> {
    let true_rank = 5;
    let clean = lowrank_cube(64, 64, 50, true_rank, 11)?;
    let noisy = add_gaussian_noise_snr(&clean, 30.0, 12)?;

    let (_, noise_cov) = estimate_noise(&noisy)?;
    let mean_sigma = ((0..50).map(|i| noise_cov[(i, i)]).sum::<f64>() / 50.0).sqrt();
    println!("estimated mean per-band noise std: {mean_sigma:.5}");

    let model = hysime(&noisy)?;
    println!(
        "true rank {true_rank}, estimated subspace dimension {}",
        model.k
    );
    println!(
        "basis is {}x{}; selection curve minimum at k = {}",
        model.basis.nrows(),
        model.basis.ncols(),
        1 + model
            .criterion_curve
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
    );

    let head: Vec<String> = model.criterion_curve[..8]
        .iter()
        .map(|v| format!("{v:.1}"))
        .collect();
    println!("first criterion values: [{}]", head.join(", "));
    Ok(())
}
