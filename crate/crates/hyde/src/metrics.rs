//! Quality metrics for (reference, estimate) cube pairs: SNR, PSNR, mean
//! spectral angle, and MSE. All sums run in f64. Exact equality yields an
//! infinite dB value, encoded as the string `"inf"` in JSON output.

use serde_json::{json, Value};

use crate::cube::HsiCube;
use crate::error::{HydeError, Result};

/// One evaluation of all four metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub snr_db: f64,
    pub psnr_db: f64,
    pub sam_rad: f64,
    pub mse: f64,
}

fn check_shapes(reference: &HsiCube, estimate: &HsiCube) -> Result<()> {
    if reference.dims() != estimate.dims() {
        return Err(HydeError::Shape(format!(
            "reference is {:?}, estimate is {:?}",
            reference.dims(),
            estimate.dims()
        )));
    }
    Ok(())
}

/// Mean squared difference over all entries.
pub fn mse(reference: &HsiCube, estimate: &HsiCube) -> Result<f64> {
    check_shapes(reference, estimate)?;
    let mut acc = 0.0f64;
    for (&r, &e) in reference.as_bsq_slice().iter().zip(estimate.as_bsq_slice()) {
        let d = f64::from(r) - f64::from(e);
        acc += d * d;
    }
    Ok(acc / reference.num_values() as f64)
}

/// `10 log10(sum(ref^2) / sum((ref - est)^2))`. Equal cubes give +inf;
/// an all-zero reference is rejected.
pub fn snr_db(reference: &HsiCube, estimate: &HsiCube) -> Result<f64> {
    check_shapes(reference, estimate)?;
    let mut signal = 0.0f64;
    let mut noise = 0.0f64;
    for (&r, &e) in reference.as_bsq_slice().iter().zip(estimate.as_bsq_slice()) {
        let rf = f64::from(r);
        signal += rf * rf;
        let d = rf - f64::from(e);
        noise += d * d;
    }
    if signal == 0.0 {
        return Err(HydeError::Parameter(
            "SNR is undefined for an all-zero reference".into(),
        ));
    }
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Peak definition for [`psnr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakMode {
    /// Global maximum of the reference.
    #[default]
    Global,
    /// Mean over bands of per-band PSNR, each with its own band peak.
    PerBand,
}

/// Peak signal-to-noise ratio: `10 log10(peak^2 / MSE)` with the global
/// reference maximum as peak.
pub fn psnr(reference: &HsiCube, estimate: &HsiCube) -> Result<f64> {
    psnr_with(reference, estimate, PeakMode::Global)
}

pub fn psnr_with(reference: &HsiCube, estimate: &HsiCube, mode: PeakMode) -> Result<f64> {
    check_shapes(reference, estimate)?;
    match mode {
        PeakMode::Global => {
            let err = mse(reference, estimate)?;
            if err == 0.0 {
                return Ok(f64::INFINITY);
            }
            let peak = reference
                .as_bsq_slice()
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(f64::from(v)));
            Ok(10.0 * (peak * peak / err).log10())
        }
        PeakMode::PerBand => {
            let pixels = reference.num_pixels() as f64;
            let mut acc = 0.0;
            for b in 0..reference.bands() {
                let rb = reference.band(b);
                let eb = estimate.band(b);
                let peak = rb
                    .iter()
                    .fold(f64::NEG_INFINITY, |m, &v| m.max(f64::from(v)));
                let band_mse: f64 = rb
                    .iter()
                    .zip(eb)
                    .map(|(&r, &e)| {
                        let d = f64::from(r) - f64::from(e);
                        d * d
                    })
                    .sum::<f64>()
                    / pixels;
                if band_mse == 0.0 {
                    return Ok(f64::INFINITY);
                }
                acc += 10.0 * (peak * peak / band_mse).log10();
            }
            Ok(acc / reference.bands() as f64)
        }
    }
}

/// Mean spectral angle in radians: per pixel,
/// `acos(<r, e> / (|r| |e|))`, averaged over pixels. Pixels where either
/// spectrum has zero norm are excluded; if every pixel is excluded this is an
/// error. The cosine is clamped to [-1, 1] against rounding.
pub fn sam(reference: &HsiCube, estimate: &HsiCube) -> Result<f64> {
    check_shapes(reference, estimate)?;
    let (rows, cols, bands) = reference.dims();
    let pixels = rows * cols;
    let mut acc = 0.0f64;
    let mut counted = 0usize;
    for p in 0..pixels {
        let mut dot = 0.0f64;
        let mut nr = 0.0f64;
        let mut ne = 0.0f64;
        for b in 0..bands {
            let r = f64::from(reference.band(b)[p]);
            let e = f64::from(estimate.band(b)[p]);
            dot += r * e;
            nr += r * r;
            ne += e * e;
        }
        if nr == 0.0 || ne == 0.0 {
            continue;
        }
        let cos = (dot / (nr.sqrt() * ne.sqrt())).clamp(-1.0, 1.0);
        acc += cos.acos();
        counted += 1;
    }
    if counted == 0 {
        return Err(HydeError::Parameter(
            "SAM is undefined: every pixel spectrum has zero norm".into(),
        ));
    }
    Ok(acc / counted as f64)
}

/// All four metrics at once.
pub fn report(reference: &HsiCube, estimate: &HsiCube) -> Result<MetricsReport> {
    Ok(MetricsReport {
        snr_db: snr_db(reference, estimate)?,
        psnr_db: psnr(reference, estimate)?,
        sam_rad: sam(reference, estimate)?,
        mse: mse(reference, estimate)?,
    })
}

/// Encode a possibly-infinite dB value for JSON output.
pub fn db_to_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> Value {
        json!({
            "psnr_db": db_to_json(self.psnr_db),
            "sam_rad": self.sam_rad,
            "snr_db": db_to_json(self.snr_db),
            "mse": self.mse,
        })
    }
}
