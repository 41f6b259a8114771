//! The hyperspectral cube data model: construction, band-wise normalization,
//! and the pixels-by-bands matrix unfolding shared by all subspace methods.
//!
//! Storage is band-sequential (BSQ): `data` has shape `(bands, rows, cols)`,
//! so one band is a contiguous `rows x cols` block. Values are 32-bit floats;
//! accumulating arithmetic inside the library runs in 64-bit.

use ndarray::{Array2, Array3};

use crate::error::{HydeError, Result};

/// A hyperspectral data volume plus layout metadata. Immutable after
/// construction; all operations return new cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    rows: usize,
    cols: usize,
    bands: usize,
    /// Shape `(bands, rows, cols)`, standard layout (BSQ).
    data: Array3<f32>,
    /// Per-band center wavelengths in nanometers, strictly increasing.
    wavelengths: Option<Vec<f64>>,
}

impl HsiCube {
    /// Build a cube from a flat BSQ buffer (all pixels of band 0, then band 1, ...;
    /// row-major within a band). Rejects empty dimensions, length mismatches,
    /// and non-finite values.
    pub fn from_bsq(rows: usize, cols: usize, bands: usize, data: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(HydeError::Parameter(format!(
                "cube dimensions must be positive, got {rows}x{cols}x{bands}"
            )));
        }
        let expected = rows * cols * bands;
        if data.len() != expected {
            return Err(HydeError::Integrity(format!(
                "payload has {} values but header says {}x{}x{} = {}",
                data.len(),
                rows,
                cols,
                bands,
                expected
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(HydeError::Data(format!(
                "non-finite value {} at flat BSQ index {idx}",
                data[idx]
            )));
        }
        let data = Array3::from_shape_vec((bands, rows, cols), data)
            .expect("length checked against dimensions");
        Ok(Self {
            rows,
            cols,
            bands,
            data,
            wavelengths: None,
        })
    }

    /// Build from an already-shaped `(bands, rows, cols)` array.
    pub fn from_array(data: Array3<f32>) -> Result<Self> {
        let (bands, rows, cols) = data.dim();
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().to_owned()
        };
        let flat = data.into_raw_vec_and_offset().0;
        Self::from_bsq(rows, cols, bands, flat)
    }

    /// Attach per-band wavelengths (nanometers). Must match the band count and
    /// be strictly increasing.
    pub fn with_wavelengths(mut self, wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.len() != self.bands {
            return Err(HydeError::Shape(format!(
                "{} wavelengths for {} bands",
                wavelengths.len(),
                self.bands
            )));
        }
        if wavelengths.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(HydeError::Data(
                "wavelengths must be strictly increasing".into(),
            ));
        }
        self.wavelengths = Some(wavelengths);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// `(rows, cols, bands)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.bands)
    }

    pub fn num_pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_values(&self) -> usize {
        self.rows * self.cols * self.bands
    }

    pub fn wavelengths(&self) -> Option<&[f64]> {
        self.wavelengths.as_deref()
    }

    /// The underlying `(bands, rows, cols)` array.
    pub fn array(&self) -> &Array3<f32> {
        &self.data
    }

    /// Flat BSQ view of the payload.
    pub fn as_bsq_slice(&self) -> &[f32] {
        self.data.as_slice().expect("cube storage is contiguous")
    }

    /// One band as a contiguous slice, row-major.
    pub fn band(&self, b: usize) -> &[f32] {
        self.data
            .index_axis(ndarray::Axis(0), b)
            .to_slice()
            .expect("band slice is contiguous in BSQ layout")
    }

    /// One band widened to f64 for numerical work.
    pub fn band_image_f64(&self, b: usize) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(r, c)| {
            f64::from(self.data[(b, r, c)])
        })
    }

    pub fn value(&self, row: usize, col: usize, band: usize) -> f32 {
        self.data[(band, row, col)]
    }

    /// The spectrum of one pixel, in band order.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f32> {
        (0..self.bands).map(|b| self.data[(b, row, col)]).collect()
    }

    /// Rebuild a cube of the same dimensions from new BSQ data, carrying over
    /// wavelengths. Fails if the computation produced non-finite values.
    pub fn like_with_data(&self, data: Vec<f32>) -> Result<Self> {
        let mut cube = Self::from_bsq(self.rows, self.cols, self.bands, data)?;
        cube.wavelengths = self.wavelengths.clone();
        Ok(cube)
    }

    /// True when every value is bit-identical (exact f32 comparison).
    pub fn bit_identical(&self, other: &HsiCube) -> bool {
        self.dims() == other.dims()
            && self
                .as_bsq_slice()
                .iter()
                .zip(other.as_bsq_slice())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Per-band min/max captured by [`normalize_bands`], enough to invert the map.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationRecord {
    pub per_band_min: Vec<f32>,
    pub per_band_max: Vec<f32>,
}

impl NormalizationRecord {
    pub fn bands(&self) -> usize {
        self.per_band_min.len()
    }
}

/// Scale each band to [0, 1] by its own min/max. A constant band maps to all
/// zeros with record `(v, v)` so the inverse is still well-defined.
pub fn normalize_bands(cube: &HsiCube) -> (HsiCube, NormalizationRecord) {
    let (rows, cols, bands) = cube.dims();
    let mut out = Vec::with_capacity(cube.num_values());
    let mut mins = Vec::with_capacity(bands);
    let mut maxs = Vec::with_capacity(bands);
    for b in 0..bands {
        let band = cube.band(b);
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in band {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        mins.push(lo);
        maxs.push(hi);
        if hi > lo {
            let scale = 1.0 / (f64::from(hi) - f64::from(lo));
            out.extend(
                band.iter()
                    .map(|&v| (((f64::from(v) - f64::from(lo)) * scale) as f32).clamp(0.0, 1.0)),
            );
        } else {
            out.extend(std::iter::repeat_n(0.0f32, rows * cols));
        }
    }
    let normalized = cube
        .like_with_data(out)
        .expect("normalization of finite data stays finite");
    (
        normalized,
        NormalizationRecord {
            per_band_min: mins,
            per_band_max: maxs,
        },
    )
}

/// Invert [`normalize_bands`]: band i is mapped by `x * (max_i - min_i) + min_i`.
pub fn denormalize_bands(cube: &HsiCube, record: &NormalizationRecord) -> Result<HsiCube> {
    if record.bands() != cube.bands() || record.per_band_max.len() != cube.bands() {
        return Err(HydeError::Shape(format!(
            "normalization record covers {} bands, cube has {}",
            record.bands(),
            cube.bands()
        )));
    }
    let mut out = Vec::with_capacity(cube.num_values());
    for b in 0..cube.bands() {
        let lo = f64::from(record.per_band_min[b]);
        let hi = f64::from(record.per_band_max[b]);
        let span = hi - lo;
        out.extend(
            cube.band(b)
                .iter()
                .map(|&v| (f64::from(v) * span + lo) as f32),
        );
    }
    cube.like_with_data(out)
}

/// The cube unfolded to a `(rows*cols) x bands` matrix: column j is band j in
/// row-major pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeMatrix {
    pub matrix: Array2<f32>,
    pub origin_dims: (usize, usize, usize),
}

/// Unfold a cube into pixel-major matrix form.
pub fn unfold(cube: &HsiCube) -> CubeMatrix {
    let (rows, cols, bands) = cube.dims();
    let pixels = rows * cols;
    let mut matrix = Array2::zeros((pixels, bands));
    for b in 0..bands {
        let band = cube.band(b);
        for (p, &v) in band.iter().enumerate() {
            matrix[(p, b)] = v;
        }
    }
    CubeMatrix {
        matrix,
        origin_dims: (rows, cols, bands),
    }
}

/// Fold a pixels-by-bands matrix back into a cube. Exact inverse of [`unfold`].
pub fn fold(m: &CubeMatrix) -> Result<HsiCube> {
    let (rows, cols, bands) = m.origin_dims;
    let (mrows, mcols) = m.matrix.dim();
    if mrows != rows * cols || mcols != bands {
        return Err(HydeError::Shape(format!(
            "matrix is {mrows}x{mcols} but origin dims {rows}x{cols}x{bands} need {}x{bands}",
            rows * cols
        )));
    }
    let mut data = Vec::with_capacity(rows * cols * bands);
    for b in 0..bands {
        for p in 0..rows * cols {
            data.push(m.matrix[(p, b)]);
        }
    }
    HsiCube::from_bsq(rows, cols, bands, data)
}
