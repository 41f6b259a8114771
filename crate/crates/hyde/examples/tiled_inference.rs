//! Denoise a cube in overlapping tiles to bound peak memory, and compare
//! against the untiled run.
//!
//! ```bash
//! cargo run -p hyde --example tiled_inference
//! ```

use hyde::denoise::{denoise, DenoiseParams, Method};
use hyde::metrics::psnr;
use hyde::noise::add_gaussian_noise_snr;
use hyde::synth::lowrank_cube;
use hyde::tiling::{plan_tiles, tiled_denoise};

fn main() -> hyde::Result<()> {
    let clean = lowrank_cube(96, 96, 16, 4, 21)?;
    let noisy = add_gaussian_noise_snr(&clean, 20.0, 22)?;

    let params = DenoiseParams {
        lambda: Some(5.0),
        ..DenoiseParams::default()
    };
    let plan = plan_tiles(noisy.dims(), (48, 48, 16), (32, 32, 0))?;
    println!(
        "plan: {} tiles of {:?} with overlap {:?}",
        plan.tiles.len(),
        plan.tile,
        plan.overlap
    );

    let untiled = denoise(Method::Forpdn, &noisy, &params)?;
    let tiled = tiled_denoise(Method::Forpdn, &params, &noisy, &plan, 2)?;

    let max_diff = untiled
        .as_bsq_slice()
        .iter()
        .zip(tiled.as_bsq_slice())
        .map(|(&a, &b)| (f64::from(a) - f64::from(b)).abs())
        .fold(0.0, f64::max);
    println!(
        "untiled PSNR {:.2} dB, tiled PSNR {:.2} dB, max |difference| {max_diff:.2e}",
        psnr(&clean, &untiled)?,
        psnr(&clean, &tiled)?
    );

    // The blending weights form a partition of unity: an identity "denoiser"
    // reproduces the input bit for bit.
    let identity = hyde::tiling::tiled_apply(&noisy, &plan, 1, |t| Ok(t.clone()))?;
    println!(
        "identity method bit-identical: {}",
        identity.bit_identical(&noisy)
    );
    Ok(())
}
