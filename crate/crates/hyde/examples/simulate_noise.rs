//! Apply each of the five noise models to one cube and measure the damage.
//!
//! ```bash
//! cargo run -p hyde --example simulate_noise
//! ```

use hyde::metrics::snr_db;
use hyde::noise::{
    add_deadline, add_gaussian_noise_snr, add_noniid_gaussian, add_salt_pepper, add_stripes,
};
use hyde::synth::lowrank_cube;

fn main() -> hyde::Result<()> {
    let clean = lowrank_cube(64, 64, 16, 4, 7)?;

    let noisy = add_gaussian_noise_snr(&clean, 20.0, 1)?;
    println!(
        "gaussian at 20 dB target  -> realized SNR {:.2} dB",
        snr_db(&clean, &noisy)?
    );

    let noisy = add_noniid_gaussian(&clean, 0.01, 0.1, 2)?;
    println!(
        "non-i.i.d. sigma 0.01-0.1 -> realized SNR {:.2} dB",
        snr_db(&clean, &noisy)?
    );

    let noisy = add_salt_pepper(&clean, 0.05, 3)?;
    let flipped = clean
        .as_bsq_slice()
        .iter()
        .zip(noisy.as_bsq_slice())
        .filter(|(a, b)| a != b)
        .count();
    println!(
        "salt & pepper p = 0.05    -> {:.2}% of entries corrupted",
        100.0 * flipped as f64 / clean.num_values() as f64
    );

    let (noisy, mask) = add_deadline(&clean, 0.1, 0.5, 4)?;
    println!(
        "deadline 10% cols, 50% bands -> {} bands affected, {} dead columns each, SNR {:.2} dB",
        mask.len(),
        mask.first().map_or(0, |(_, cols)| cols.len()),
        snr_db(&clean, &noisy)?
    );

    let (noisy, mask) = add_stripes(&clean, 0.2, 0.1, 5)?;
    println!(
        "stripes 20% cols, amp 0.1 -> {} striped columns per band, SNR {:.2} dB",
        mask[0].1.len(),
        snr_db(&clean, &noisy)?
    );
    Ok(())
}
