//! The shortest useful pipeline: corrupt a cube with Gaussian noise, run the
//! parameter-free HyRes denoiser, and report quality metrics.
//!
//! ```bash
//! cargo run -p hyde --example denoise_basic
//! ```

use hyde::denoise::hyres;
use hyde::metrics::report;
use hyde::noise::add_gaussian_noise_snr;
use hyde::synth::lowrank_cube;

fn main() -> hyde::Result<()> {
    let clean = lowrank_cube(64, 64, 31, 6, 1)?;
    let noisy = add_gaussian_noise_snr(&clean, 20.0, 2)?;

    let denoised = hyres(&noisy)?;

    let before = report(&clean, &noisy)?;
    let after = report(&clean, &denoised)?;
    println!(
        "noisy:    PSNR {:6.2} dB   SAM {:.4} rad   MSE {:.6}",
        before.psnr_db, before.sam_rad, before.mse
    );
    println!(
        "denoised: PSNR {:6.2} dB   SAM {:.4} rad   MSE {:.6}",
        after.psnr_db, after.sam_rad, after.mse
    );
    println!("gain: {:+.2} dB", after.psnr_db - before.psnr_db);
    Ok(())
}
