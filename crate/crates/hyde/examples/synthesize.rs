//! Generate a synthetic low-rank ground-truth cube, write it to a `.hyde`
//! container, and read it back.
//!
//! ```bash
//! cargo run -p hyde --example synthesize
//! ```

use hyde::synth::lowrank_cube;
use hyde::{load_cube, save_cube};

fn main() -> hyde::Result<()> {
    let cube = lowrank_cube(64, 64, 31, 5, 42)?;
    println!(
        "generated {}x{}x{} cube, rank 5, {} values",
        cube.rows(),
        cube.cols(),
        cube.bands(),
        cube.num_values()
    );

    let dir = std::env::temp_dir();
    let path = dir.join("hyde-example-ground-truth.hyde");
    save_cube(&cube, &path)?;
    let back = load_cube(&path)?;
    println!(
        "round trip through {} is bit-identical: {}",
        path.display(),
        back.bit_identical(&cube)
    );

    let spectrum = cube.spectrum(32, 32);
    println!(
        "center-pixel spectrum: min {:.3}, max {:.3}",
        spectrum.iter().cloned().fold(f32::INFINITY, f32::min),
        spectrum.iter().cloned().fold(f32::NEG_INFINITY, f32::max),
    );
    Ok(())
}
