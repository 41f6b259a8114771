//! Run every registered method on the same noisy cube and compare.
//!
//! ```bash
//! cargo run -p hyde --example compare_methods
//! ```

use hyde::denoise::{denoise, DenoiseParams, Method};
use hyde::metrics::{psnr, sam};
use hyde::noise::{add_gaussian_noise_snr, add_salt_pepper};
use hyde::synth::lowrank_cube;

fn main() -> hyde::Result<()> {
    let clean = lowrank_cube(64, 64, 31, 5, 3)?;
    let gaussian = add_gaussian_noise_snr(&clean, 20.0, 4)?;
    // A pinch of impulse noise separates the mixed-noise specialist.
    let noisy = add_salt_pepper(&gaussian, 0.02, 5)?;

    println!(
        "input: PSNR {:.2} dB, SAM {:.4} rad",
        psnr(&clean, &noisy)?,
        sam(&clean, &noisy)?
    );
    println!(
        "{:<10} {:>10} {:>10} {:>9}",
        "method", "psnr[dB]", "sam[rad]", "time[s]"
    );

    let params = DenoiseParams {
        rank: Some(5),
        ..DenoiseParams::default()
    };
    for method in Method::ALL {
        let started = std::time::Instant::now();
        let out = denoise(method, &noisy, &params)?;
        let dt = started.elapsed().as_secs_f64();
        println!(
            "{:<10} {:>10.2} {:>10.4} {:>9.3}",
            method.name(),
            psnr(&clean, &out)?,
            sam(&clean, &out)?,
            dt
        );
    }
    Ok(())
}
