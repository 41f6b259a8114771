//! Seeded noise simulators and the training-style augmentation transform.
//!
//! Every simulator is a pure function of `(input, parameters, seed)`: the
//! random stream is derived from the seed and an operation label (see
//! [`crate::rng`]), so repeated and concurrent calls are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::cube::{normalize_bands, HsiCube, NormalizationRecord};
use crate::error::{HydeError, Result};
use crate::rng::{Stream, StreamId};

/// One noise injection, JSON-serializable for the CLI `simulate` command.
///
/// ```json
/// {"kind":"gaussian_snr","target_snr_db":20,"seed":1234}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    GaussianSnr {
        target_snr_db: f64,
        seed: u64,
    },
    NoniidGaussian {
        sigma_low: f64,
        sigma_high: f64,
        seed: u64,
    },
    SaltPepper {
        p: f64,
        seed: u64,
    },
    Deadline {
        col_fraction: f64,
        band_fraction: f64,
        seed: u64,
    },
    Stripe {
        stripe_fraction: f64,
        amplitude: f64,
        seed: u64,
    },
}

impl NoiseSpec {
    pub fn apply(&self, cube: &HsiCube) -> Result<HsiCube> {
        match *self {
            NoiseSpec::GaussianSnr {
                target_snr_db,
                seed,
            } => add_gaussian_noise_snr(cube, target_snr_db, seed),
            NoiseSpec::NoniidGaussian {
                sigma_low,
                sigma_high,
                seed,
            } => add_noniid_gaussian(cube, sigma_low, sigma_high, seed),
            NoiseSpec::SaltPepper { p, seed } => add_salt_pepper(cube, p, seed),
            NoiseSpec::Deadline {
                col_fraction,
                band_fraction,
                seed,
            } => add_deadline(cube, col_fraction, band_fraction, seed).map(|(c, _)| c),
            NoiseSpec::Stripe {
                stripe_fraction,
                amplitude,
                seed,
            } => add_stripes(cube, stripe_fraction, amplitude, seed).map(|(c, _)| c),
        }
    }
}

/// Mean square over every entry; the signal-power definition used to size
/// SNR-targeted noise.
pub fn signal_power(cube: &HsiCube) -> f64 {
    let mut acc = 0.0f64;
    for &v in cube.as_bsq_slice() {
        acc += f64::from(v) * f64::from(v);
    }
    acc / cube.num_values() as f64
}

/// Add i.i.d. zero-mean Gaussian noise sized so the result has the requested
/// SNR: `sigma^2 = P_signal / 10^(SNR/10)`.
pub fn add_gaussian_noise_snr(cube: &HsiCube, target_snr_db: f64, seed: u64) -> Result<HsiCube> {
    if !target_snr_db.is_finite() {
        return Err(HydeError::Parameter(format!(
            "target SNR must be finite, got {target_snr_db}"
        )));
    }
    let power = signal_power(cube);
    if power == 0.0 {
        return Err(HydeError::Parameter(
            "SNR target is undefined for an all-zero cube".into(),
        ));
    }
    let sigma = (power / 10f64.powf(target_snr_db / 10.0)).sqrt();
    let mut stream = Stream::new(seed, StreamId::GaussianSnr);
    let data: Vec<f32> = cube
        .as_bsq_slice()
        .iter()
        .map(|&v| (f64::from(v) + sigma * stream.gaussian()) as f32)
        .collect();
    cube.like_with_data(data)
}

/// Per-band Gaussian noise with band levels drawn uniformly from
/// `[sigma_low, sigma_high]`. All band sigmas are drawn first, so the level
/// sequence depends only on the seed.
pub fn add_noniid_gaussian(
    cube: &HsiCube,
    sigma_low: f64,
    sigma_high: f64,
    seed: u64,
) -> Result<HsiCube> {
    if !(0.0 <= sigma_low && sigma_low <= sigma_high) {
        return Err(HydeError::Parameter(format!(
            "need 0 <= sigma_low <= sigma_high, got [{sigma_low}, {sigma_high}]"
        )));
    }
    let mut stream = Stream::new(seed, StreamId::NoniidGaussian);
    let sigmas: Vec<f64> = (0..cube.bands())
        .map(|_| stream.uniform_in(sigma_low, sigma_high))
        .collect();
    let mut data = Vec::with_capacity(cube.num_values());
    for (b, sigma) in sigmas.iter().enumerate() {
        if *sigma == 0.0 {
            data.extend_from_slice(cube.band(b));
        } else {
            data.extend(
                cube.band(b)
                    .iter()
                    .map(|&v| (f64::from(v) + sigma * stream.gaussian()) as f32),
            );
        }
    }
    cube.like_with_data(data)
}

/// Stuck-pixel noise: each (pixel, band) entry is independently replaced by
/// the band maximum or band minimum, each with probability `p / 2`.
pub fn add_salt_pepper(cube: &HsiCube, p: f64, seed: u64) -> Result<HsiCube> {
    if !(0.0..=1.0).contains(&p) {
        return Err(HydeError::Parameter(format!(
            "salt-and-pepper probability must be in [0, 1], got {p}"
        )));
    }
    let mut stream = Stream::new(seed, StreamId::SaltPepper);
    let mut data = Vec::with_capacity(cube.num_values());
    for b in 0..cube.bands() {
        let band = cube.band(b);
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in band {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for &v in band {
            let u = stream.uniform();
            data.push(if u < p / 2.0 {
                lo
            } else if u < p {
                hi
            } else {
                v
            });
        }
    }
    cube.like_with_data(data)
}

/// Which (band, column) pairs a column-wise corruption touched.
pub type ColumnMask = Vec<(usize, Vec<usize>)>;

/// Dead-column noise: `round(band_fraction * bands)` bands each get
/// `round(col_fraction * cols)` random columns zeroed. Returns the affected
/// (band, columns) set alongside the cube.
pub fn add_deadline(
    cube: &HsiCube,
    col_fraction: f64,
    band_fraction: f64,
    seed: u64,
) -> Result<(HsiCube, ColumnMask)> {
    for (name, v) in [
        ("col_fraction", col_fraction),
        ("band_fraction", band_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(HydeError::Parameter(format!(
                "{name} must be in [0, 1], got {v}"
            )));
        }
    }
    let (rows, cols, bands) = cube.dims();
    let n_bands = (band_fraction * bands as f64).round() as usize;
    let n_cols = (col_fraction * cols as f64).round() as usize;
    let mut stream = Stream::new(seed, StreamId::Deadline);

    let mut affected_bands = stream.choose_distinct(bands, n_bands);
    affected_bands.sort_unstable();
    let mut mask: ColumnMask = Vec::with_capacity(n_bands);
    let mut data = cube.as_bsq_slice().to_vec();
    for &b in &affected_bands {
        let mut cols_hit = stream.choose_distinct(cols, n_cols);
        cols_hit.sort_unstable();
        let base = b * rows * cols;
        for &c in &cols_hit {
            for r in 0..rows {
                data[base + r * cols + c] = 0.0;
            }
        }
        mask.push((b, cols_hit));
    }
    Ok((cube.like_with_data(data)?, mask))
}

/// Per-band striping offsets applied.
pub type StripeMask = Vec<(usize, Vec<(usize, f64)>)>;

/// Stripe noise: in every band, `round(stripe_fraction * cols)` random
/// columns get a constant offset drawn uniformly from
/// `[-amplitude, +amplitude]`. Returns the per-band (column, offset) sets.
pub fn add_stripes(
    cube: &HsiCube,
    stripe_fraction: f64,
    amplitude: f64,
    seed: u64,
) -> Result<(HsiCube, StripeMask)> {
    if !(0.0..=1.0).contains(&stripe_fraction) {
        return Err(HydeError::Parameter(format!(
            "stripe_fraction must be in [0, 1], got {stripe_fraction}"
        )));
    }
    if !(amplitude >= 0.0) {
        return Err(HydeError::Parameter(format!(
            "stripe amplitude must be non-negative, got {amplitude}"
        )));
    }
    let (rows, cols, bands) = cube.dims();
    let n_cols = (stripe_fraction * cols as f64).round() as usize;
    let mut stream = Stream::new(seed, StreamId::Stripe);
    let mut data = cube.as_bsq_slice().to_vec();
    let mut mask: StripeMask = Vec::with_capacity(bands);
    for b in 0..bands {
        let mut cols_hit = stream.choose_distinct(cols, n_cols);
        cols_hit.sort_unstable();
        let offsets: Vec<(usize, f64)> = cols_hit
            .iter()
            .map(|&c| (c, stream.uniform_in(-amplitude, amplitude)))
            .collect();
        let base = b * rows * cols;
        for &(c, delta) in &offsets {
            for r in 0..rows {
                let i = base + r * cols + c;
                data[i] = (f64::from(data[i]) + delta) as f32;
            }
        }
        mask.push((b, offsets));
    }
    Ok((cube.like_with_data(data)?, mask))
}

/// Spatial symmetry applied during augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricTransform {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    FlipH,
    FlipV,
}

impl GeometricTransform {
    pub const ALL: [GeometricTransform; 6] = [
        GeometricTransform::Identity,
        GeometricTransform::Rot90,
        GeometricTransform::Rot180,
        GeometricTransform::Rot270,
        GeometricTransform::FlipH,
        GeometricTransform::FlipV,
    ];
}

/// Scale factor range for the random spatial rescale; spatial axes only.
pub const SCALE_RANGE: (f64, f64) = (0.5, 1.0);

/// Configuration of one augmentation draw.
#[derive(Debug, Clone)]
pub struct AugmentConfig {
    pub crop_rows: usize,
    pub crop_cols: usize,
    /// Number of consecutive bands to keep.
    pub band_count: usize,
    pub snr_low_db: f64,
    pub snr_high_db: f64,
    pub transforms: Vec<GeometricTransform>,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(crop_rows: usize, crop_cols: usize, band_count: usize, seed: u64) -> Self {
        AugmentConfig {
            crop_rows,
            crop_cols,
            band_count,
            snr_low_db: 20.0,
            snr_high_db: 30.0,
            transforms: GeometricTransform::ALL.to_vec(),
            seed,
        }
    }
}

fn bilinear_rescale(cube: &HsiCube, new_rows: usize, new_cols: usize) -> HsiCube {
    let (rows, cols, bands) = cube.dims();
    let rscale = rows as f64 / new_rows as f64;
    let cscale = cols as f64 / new_cols as f64;
    let mut data = Vec::with_capacity(new_rows * new_cols * bands);
    for b in 0..bands {
        let band = cube.band(b);
        for r in 0..new_rows {
            let src_r = ((r as f64 + 0.5) * rscale - 0.5).clamp(0.0, (rows - 1) as f64);
            let r0 = src_r.floor() as usize;
            let r1 = (r0 + 1).min(rows - 1);
            let fr = src_r - r0 as f64;
            for c in 0..new_cols {
                let src_c = ((c as f64 + 0.5) * cscale - 0.5).clamp(0.0, (cols - 1) as f64);
                let c0 = src_c.floor() as usize;
                let c1 = (c0 + 1).min(cols - 1);
                let fc = src_c - c0 as f64;
                let v00 = f64::from(band[r0 * cols + c0]);
                let v01 = f64::from(band[r0 * cols + c1]);
                let v10 = f64::from(band[r1 * cols + c0]);
                let v11 = f64::from(band[r1 * cols + c1]);
                let top = v00 + fc * (v01 - v00);
                let bot = v10 + fc * (v11 - v10);
                data.push((top + fr * (bot - top)) as f32);
            }
        }
    }
    HsiCube::from_bsq(new_rows, new_cols, bands, data)
        .expect("rescale of a finite cube stays finite")
}

fn crop(cube: &HsiCube, row0: usize, col0: usize, rows: usize, cols: usize) -> HsiCube {
    let (_, src_cols, bands) = cube.dims();
    let mut data = Vec::with_capacity(rows * cols * bands);
    for b in 0..bands {
        let band = cube.band(b);
        for r in 0..rows {
            let base = (row0 + r) * src_cols + col0;
            data.extend_from_slice(&band[base..base + cols]);
        }
    }
    HsiCube::from_bsq(rows, cols, bands, data).expect("crop preserves finiteness")
}

fn band_window(cube: &HsiCube, start: usize, count: usize) -> HsiCube {
    let (rows, cols, _) = cube.dims();
    let mut data = Vec::with_capacity(rows * cols * count);
    for b in start..start + count {
        data.extend_from_slice(cube.band(b));
    }
    HsiCube::from_bsq(rows, cols, count, data).expect("band window preserves finiteness")
}

fn apply_transform(cube: &HsiCube, t: GeometricTransform) -> HsiCube {
    let (rows, cols, bands) = cube.dims();
    let (new_rows, new_cols) = match t {
        GeometricTransform::Rot90 | GeometricTransform::Rot270 => (cols, rows),
        _ => (rows, cols),
    };
    let mut data = Vec::with_capacity(cube.num_values());
    for b in 0..bands {
        let band = cube.band(b);
        for r in 0..new_rows {
            for c in 0..new_cols {
                let (sr, sc) = match t {
                    GeometricTransform::Identity => (r, c),
                    // 90 degrees counter-clockwise: output (r, c) from (c, cols-1-r) of source.
                    GeometricTransform::Rot90 => (c, cols - 1 - r),
                    GeometricTransform::Rot180 => (rows - 1 - r, cols - 1 - c),
                    GeometricTransform::Rot270 => (rows - 1 - c, r),
                    GeometricTransform::FlipH => (r, cols - 1 - c),
                    GeometricTransform::FlipV => (rows - 1 - r, c),
                };
                data.push(band[sr * cols + sc]);
            }
        }
    }
    HsiCube::from_bsq(new_rows, new_cols, bands, data).expect("transform preserves finiteness")
}

/// One augmentation draw, in this fixed order: random spatial rescale, random
/// crop, random consecutive band window, random geometric transform, Gaussian
/// noise to a random SNR in `[snr_low, snr_high]`, then per-band
/// normalization — after the noise, with the noisy cube's min/max applied to
/// both outputs. The clean and noisy cubes differ only by the noise step.
pub fn augment_sample(
    cube: &HsiCube,
    cfg: &AugmentConfig,
) -> Result<(HsiCube, HsiCube, NormalizationRecord)> {
    let (rows, cols, bands) = cube.dims();
    if cfg.band_count == 0 || cfg.band_count > bands {
        return Err(HydeError::Parameter(format!(
            "band_count {} out of range for {} bands",
            cfg.band_count, bands
        )));
    }
    if !(cfg.snr_low_db <= cfg.snr_high_db) {
        return Err(HydeError::Parameter(format!(
            "need snr_low <= snr_high, got [{}, {}]",
            cfg.snr_low_db, cfg.snr_high_db
        )));
    }
    if cfg.transforms.is_empty() {
        return Err(HydeError::Parameter(
            "transform set must not be empty".into(),
        ));
    }
    // The crop must fit at the smallest possible scale.
    let min_rows = (rows as f64 * SCALE_RANGE.0).round() as usize;
    let min_cols = (cols as f64 * SCALE_RANGE.0).round() as usize;
    if cfg.crop_rows == 0
        || cfg.crop_cols == 0
        || cfg.crop_rows > min_rows
        || cfg.crop_cols > min_cols
    {
        return Err(HydeError::Parameter(format!(
            "crop {}x{} does not fit the scaled cube (minimum {}x{})",
            cfg.crop_rows, cfg.crop_cols, min_rows, min_cols
        )));
    }

    let mut stream = Stream::new(cfg.seed, StreamId::Augment);

    // 1. Random scale, spatial axes only.
    let scale = stream.uniform_in(SCALE_RANGE.0, SCALE_RANGE.1);
    let new_rows = (rows as f64 * scale).round().max(1.0) as usize;
    let new_cols = (cols as f64 * scale).round().max(1.0) as usize;
    let scaled = bilinear_rescale(cube, new_rows, new_cols);

    // 2. Random crop.
    let row0 = stream.index(new_rows - cfg.crop_rows + 1);
    let col0 = stream.index(new_cols - cfg.crop_cols + 1);
    let cropped = crop(&scaled, row0, col0, cfg.crop_rows, cfg.crop_cols);

    // 3. Consecutive band window.
    let band0 = stream.index(bands - cfg.band_count + 1);
    let windowed = band_window(&cropped, band0, cfg.band_count);

    // 4. Geometric transform.
    let t = cfg.transforms[stream.index(cfg.transforms.len())];
    let clean_geo = apply_transform(&windowed, t);

    // 5. Gaussian noise at a random target SNR.
    let target_snr = stream.uniform_in(cfg.snr_low_db, cfg.snr_high_db);
    let noise_seed = stream.next_u64();
    let noisy_raw = add_gaussian_noise_snr(&clean_geo, target_snr, noise_seed)?;

    // 6. Normalize after the noise; the noisy stats apply to both outputs.
    let (noisy, record) = normalize_bands(&noisy_raw);
    let mut clean_data = Vec::with_capacity(clean_geo.num_values());
    for b in 0..clean_geo.bands() {
        let lo = f64::from(record.per_band_min[b]);
        let hi = f64::from(record.per_band_max[b]);
        let span = hi - lo;
        if span > 0.0 {
            clean_data.extend(
                clean_geo
                    .band(b)
                    .iter()
                    .map(|&v| ((f64::from(v) - lo) / span) as f32),
            );
        } else {
            clean_data.extend(std::iter::repeat_n(0.0f32, clean_geo.num_pixels()));
        }
    }
    let clean = clean_geo.like_with_data(clean_data)?;
    Ok((noisy, clean, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    fn test_cube(rows: usize, cols: usize, bands: usize, seed: u64) -> HsiCube {
        let mut s = Stream::new(seed, StreamId::Synth);
        let data: Vec<f32> = (0..rows * cols * bands)
            .map(|_| (0.2 + 0.8 * s.uniform()) as f32)
            .collect();
        HsiCube::from_bsq(rows, cols, bands, data).unwrap()
    }

    #[test]
    fn gaussian_snr_hits_target() {
        let cube = test_cube(64, 64, 32, 1);
        for target in [20.0, 30.0, 40.0] {
            let noisy = add_gaussian_noise_snr(&cube, target, 7).unwrap();
            let realized = metrics::snr_db(&cube, &noisy).unwrap();
            assert!(
                (realized - target).abs() <= 0.1,
                "target {target} dB, realized {realized} dB"
            );
        }
    }

    #[test]
    fn gaussian_sigma_closed_form() {
        // Unit-power signal at 20 dB needs sigma = 0.1.
        let power = 1.0f64;
        let sigma = (power / 10f64.powf(20.0 / 10.0)).sqrt();
        assert!((sigma - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rejects_zero_cube_and_infinite_target() {
        let zero = HsiCube::from_bsq(2, 2, 1, vec![0.0; 4]).unwrap();
        assert!(matches!(
            add_gaussian_noise_snr(&zero, 20.0, 1),
            Err(HydeError::Parameter(_))
        ));
        let cube = test_cube(4, 4, 2, 2);
        assert!(matches!(
            add_gaussian_noise_snr(&cube, f64::INFINITY, 1),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cube = test_cube(16, 16, 4, 3);
        let a = add_gaussian_noise_snr(&cube, 25.0, 99).unwrap();
        let b = add_gaussian_noise_snr(&cube, 25.0, 99).unwrap();
        assert!(a.bit_identical(&b));
        let c = add_gaussian_noise_snr(&cube, 25.0, 100).unwrap();
        assert!(!a.bit_identical(&c));
    }

    #[test]
    fn noniid_band_stds() {
        let cube = test_cube(64, 64, 8, 4);
        let s = 0.05;
        let noisy = add_noniid_gaussian(&cube, s, s, 11).unwrap();
        for b in 0..8 {
            let diffs: Vec<f64> = cube
                .band(b)
                .iter()
                .zip(noisy.band(b))
                .map(|(&x, &y)| f64::from(y) - f64::from(x))
                .collect();
            let var = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
            let std = var.sqrt();
            assert!((std - s).abs() <= 0.05 * s, "band {b}: std {std} vs {s}");
        }
    }

    #[test]
    fn noniid_zero_high_is_identity() {
        let cube = test_cube(8, 8, 3, 5);
        let noisy = add_noniid_gaussian(&cube, 0.0, 0.0, 1).unwrap();
        assert!(noisy.bit_identical(&cube));
    }

    #[test]
    fn noniid_levels_vary_across_bands() {
        let cube = test_cube(64, 64, 12, 6);
        let noisy = add_noniid_gaussian(&cube, 0.01, 0.2, 21).unwrap();
        let mut stds = Vec::new();
        for b in 0..12 {
            let var = cube
                .band(b)
                .iter()
                .zip(noisy.band(b))
                .map(|(&x, &y)| (f64::from(y) - f64::from(x)).powi(2))
                .sum::<f64>()
                / 4096.0;
            stds.push(var.sqrt());
        }
        let lo = stds.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = stds.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo > 1.5, "band stds suspiciously uniform: {stds:?}");
    }

    #[test]
    fn salt_pepper_extremes() {
        let cube = test_cube(16, 16, 2, 7);
        let id = add_salt_pepper(&cube, 0.0, 1).unwrap();
        assert!(id.bit_identical(&cube));

        let all = add_salt_pepper(&cube, 1.0, 1).unwrap();
        for b in 0..2 {
            let band = cube.band(b);
            let lo = band.iter().cloned().fold(f32::INFINITY, f32::min);
            let hi = band.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
            for &v in all.band(b) {
                assert!(v == lo || v == hi);
            }
        }
    }

    #[test]
    fn salt_pepper_corruption_fraction() {
        let cube = test_cube(128, 128, 4, 8);
        let p = 0.1;
        let noisy = add_salt_pepper(&cube, p, 33).unwrap();
        let corrupted = cube
            .as_bsq_slice()
            .iter()
            .zip(noisy.as_bsq_slice())
            .filter(|(a, b)| a != b)
            .count();
        let frac = corrupted as f64 / cube.num_values() as f64;
        assert!((0.09..=0.11).contains(&frac), "corrupted fraction {frac}");
    }

    #[test]
    fn deadline_counts_and_mask() {
        let cube = test_cube(64, 64, 16, 9);
        let (noisy, mask) = add_deadline(&cube, 0.1, 0.5, 17).unwrap();
        assert_eq!(mask.len(), 8); // round(0.5 * 16)
        for (b, cols_hit) in &mask {
            assert_eq!(cols_hit.len(), 6, "band {b}"); // round(0.1 * 64)
            for &c in cols_hit {
                for r in 0..64 {
                    assert_eq!(noisy.value(r, c, *b), 0.0);
                }
            }
        }
    }

    #[test]
    fn deadline_extremes() {
        let cube = test_cube(8, 8, 4, 10);
        let (id, mask) = add_deadline(&cube, 0.0, 1.0, 3).unwrap();
        assert!(id.bit_identical(&cube));
        assert!(mask.iter().all(|(_, cols)| cols.is_empty()));

        let (zeroed, _) = add_deadline(&cube, 1.0, 1.0, 3).unwrap();
        assert!(zeroed.as_bsq_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stripes_mask_and_shift() {
        let cube = test_cube(32, 100, 3, 11);
        let (noisy, mask) = add_stripes(&cube, 0.2, 0.5, 19).unwrap();
        for (b, offsets) in &mask {
            assert_eq!(offsets.len(), 20, "band {b}"); // round(0.2 * 100)
            for &(c, delta) in offsets {
                let before: f64 = (0..32).map(|r| f64::from(cube.value(r, c, *b))).sum();
                let after: f64 = (0..32).map(|r| f64::from(noisy.value(r, c, *b))).sum();
                let shift = (after - before) / 32.0;
                assert!(
                    (shift - delta).abs() < 1e-5,
                    "band {b} col {c}: shift {shift} vs offset {delta}"
                );
            }
        }
        let (id, _) = add_stripes(&cube, 0.3, 0.0, 19).unwrap();
        for (&a, &b) in cube.as_bsq_slice().iter().zip(id.as_bsq_slice()) {
            assert!((a - b).abs() == 0.0);
        }
    }

    #[test]
    fn augment_full_band_window_starts_at_zero() {
        let cube = test_cube(64, 64, 6, 12);
        let mut cfg = AugmentConfig::new(16, 16, 6, 5);
        cfg.snr_low_db = 25.0;
        cfg.snr_high_db = 25.0;
        let (noisy, clean, _) = augment_sample(&cube, &cfg).unwrap();
        assert_eq!(noisy.bands(), 6);
        assert_eq!(clean.dims(), noisy.dims());
    }

    #[test]
    fn augment_snr_and_range_contracts() {
        let cube = test_cube(96, 96, 10, 13);
        let mut cfg = AugmentConfig::new(32, 32, 5, 77);
        cfg.snr_low_db = 25.0;
        cfg.snr_high_db = 25.0;
        let (noisy, clean, record) = augment_sample(&cube, &cfg).unwrap();

        // Normalized outputs hold the [0, 1] bound per band.
        for &v in noisy.as_bsq_slice() {
            assert!((0.0..=1.0).contains(&v));
        }

        // Undo the shared normalization and check the pre-normalization SNR.
        let noisy_raw = crate::cube::denormalize_bands(&noisy, &record).unwrap();
        let clean_raw = crate::cube::denormalize_bands(&clean, &record).unwrap();
        let snr = metrics::snr_db(&clean_raw, &noisy_raw).unwrap();
        assert!((snr - 25.0).abs() <= 0.1, "snr {snr}");
    }

    #[test]
    fn augment_determinism_and_validation() {
        let cube = test_cube(64, 64, 8, 14);
        let cfg = AugmentConfig::new(20, 20, 4, 123);
        let (n1, c1, _) = augment_sample(&cube, &cfg).unwrap();
        let (n2, c2, _) = augment_sample(&cube, &cfg).unwrap();
        assert!(n1.bit_identical(&n2));
        assert!(c1.bit_identical(&c2));

        let too_big = AugmentConfig::new(60, 60, 4, 1);
        assert!(matches!(
            augment_sample(&cube, &too_big),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn noise_spec_json_roundtrip() {
        let spec = NoiseSpec::GaussianSnr {
            target_snr_db: 20.0,
            seed: 1234,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"gaussian_snr\""));
        let back: NoiseSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let parsed: NoiseSpec =
            serde_json::from_str(r#"{"kind":"salt_pepper","p":0.05,"seed":9}"#).unwrap();
        assert_eq!(parsed, NoiseSpec::SaltPepper { p: 0.05, seed: 9 });
    }
}
