//! The training-style augmentation pipeline: random rescale, crop, band
//! window, geometric transform, noise to a random SNR, then per-band
//! normalization computed from the noisy cube and applied to both outputs.
//!
//! ```bash
//! cargo run -p hyde --example augmentation
//! ```

use hyde::metrics::snr_db;
use hyde::noise::{augment_sample, AugmentConfig};
use hyde::synth::lowrank_cube;
use hyde::{denormalize_bands, save_cube};

fn main() -> hyde::Result<()> {
    let source = lowrank_cube(128, 128, 31, 6, 31)?;

    for seed in 0..4u64 {
        let cfg = AugmentConfig::new(48, 48, 16, seed);
        let (noisy, clean, record) = augment_sample(&source, &cfg)?;

        // The normalization record lets training code map back to the
        // original scale; the pre-normalization SNR lands inside [20, 30].
        let noisy_raw = denormalize_bands(&noisy, &record)?;
        let clean_raw = denormalize_bands(&clean, &record)?;
        println!(
            "sample {seed}: {}x{}x{}, SNR {:.2} dB, noisy range [{:.2}, {:.2}]",
            noisy.rows(),
            noisy.cols(),
            noisy.bands(),
            snr_db(&clean_raw, &noisy_raw)?,
            noisy
                .as_bsq_slice()
                .iter()
                .cloned()
                .fold(f32::INFINITY, f32::min),
            noisy
                .as_bsq_slice()
                .iter()
                .cloned()
                .fold(f32::NEG_INFINITY, f32::max),
        );
    }

    let cfg = AugmentConfig::new(48, 48, 16, 99);
    let (noisy, clean, _) = augment_sample(&source, &cfg)?;
    let dir = std::env::temp_dir();
    save_cube(&noisy, dir.join("hyde-example-augmented-noisy.hyde"))?;
    save_cube(&clean, dir.join("hyde-example-augmented-clean.hyde"))?;
    println!("wrote one (noisy, clean) pair to {}", dir.display());
    Ok(())
}
