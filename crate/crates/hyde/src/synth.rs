//! Deterministic ground-truth cubes for tests and benchmarks.
//!
//! A `lowrank` cube is a sum of `rank` components, each the outer product of
//! a piecewise-constant abundance map (random rectangles, one dominant
//! rectangle per component so the factors stay well separated) and a smooth
//! positive spectral signature (a few Gaussian bumps over the band axis).
//! Values are scaled to a unit peak.

use crate::cube::HsiCube;
use crate::error::{HydeError, Result};
use crate::rng::{Stream, StreamId};

/// Generate a synthetic cube. The only kind currently understood is
/// `"lowrank"`.
pub fn generate(
    kind: &str,
    rows: usize,
    cols: usize,
    bands: usize,
    rank: usize,
    seed: u64,
) -> Result<HsiCube> {
    match kind {
        "lowrank" => lowrank_cube(rows, cols, bands, rank, seed),
        other => Err(HydeError::Parameter(format!(
            "unknown synthetic kind {other:?} (supported: lowrank)"
        ))),
    }
}

/// Exactly rank-`rank` cube with smooth spectra and piecewise-constant
/// abundances; same `(dims, rank, seed)` always yields the same cube.
pub fn lowrank_cube(
    rows: usize,
    cols: usize,
    bands: usize,
    rank: usize,
    seed: u64,
) -> Result<HsiCube> {
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(HydeError::Parameter(format!(
            "dimensions must be positive, got {rows}x{cols}x{bands}"
        )));
    }
    if rank == 0 || rank > bands || rank > rows * cols {
        return Err(HydeError::Parameter(format!(
            "rank {rank} out of range for a {rows}x{cols}x{bands} cube"
        )));
    }
    let mut stream = Stream::new(seed, StreamId::Synth);

    // Smooth positive spectral signatures: a gentle polynomial continuum plus
    // one wide Gaussian bump per component. Bump centers are spread across
    // the band axis so the signatures stay linearly independent; the width is
    // tied to the component spacing so the spectra stay smooth at any rank.
    let spacing = bands as f64 / rank as f64;
    let width = (spacing).max(2.0);
    let mut signatures = vec![vec![0.0f64; bands]; rank];
    for (k, sig) in signatures.iter_mut().enumerate() {
        let c0 = stream.uniform_in(0.25, 0.55);
        let c1 = stream.uniform_in(-0.3, 0.3);
        let c2 = stream.uniform_in(-0.2, 0.2);
        let amp = stream.uniform_in(0.65, 1.0);
        let center = spacing * (k as f64 + 0.5) + stream.uniform_in(-0.15, 0.15) * spacing;
        for (b, v) in sig.iter_mut().enumerate() {
            let x = (b as f64 + 0.5) / bands as f64;
            let continuum = c0 + c1 * x + c2 * x * x;
            let t = (b as f64 - center) / width;
            *v = continuum + amp * (-0.5 * t * t).exp();
        }
    }

    // Piecewise-constant abundance maps: one dominant rectangle per component
    // inside its own grid cell, plus a few extras anywhere.
    let grid = (rank as f64).sqrt().ceil() as usize;
    let cell_rows = (rows / grid).max(1);
    let cell_cols = (cols / grid).max(1);
    let mut abundances = vec![vec![0.0f64; rows * cols]; rank];
    for (k, map) in abundances.iter_mut().enumerate() {
        let cell_r = (k / grid).min(grid - 1);
        let cell_c = k % grid;
        let home_r0 = (cell_r * cell_rows).min(rows - 1);
        let home_c0 = (cell_c * cell_cols).min(cols - 1);
        let home_r1 = ((cell_r + 1) * cell_rows).min(rows);
        let home_c1 = ((cell_c + 1) * cell_cols).min(cols);
        paint_rectangle(
            map,
            rows,
            cols,
            home_r0,
            home_c0,
            home_r1.max(home_r0 + 1),
            home_c1.max(home_c0 + 1),
            stream.uniform_in(0.7, 1.0),
        );
        for _ in 0..3 {
            let h = 1 + stream.index((rows / 2).max(1));
            let w = 1 + stream.index((cols / 2).max(1));
            let r0 = stream.index(rows - h + 1);
            let c0 = stream.index(cols - w + 1);
            paint_rectangle(
                map,
                rows,
                cols,
                r0,
                c0,
                r0 + h,
                c0 + w,
                stream.uniform_in(0.2, 0.8),
            );
        }
    }

    // One box-blur pass takes the hardest edges off the rectangles (real
    // scenes have mixed pixels). Blurring each map separately keeps the cube
    // exactly rank-`rank`.
    for map in abundances.iter_mut() {
        *map = box_blur(map, rows, cols);
    }

    let mut data = vec![0.0f64; rows * cols * bands];
    for k in 0..rank {
        for b in 0..bands {
            let sv = signatures[k][b];
            let base = b * rows * cols;
            for p in 0..rows * cols {
                data[base + p] += abundances[k][p] * sv;
            }
        }
    }
    let peak = data.iter().cloned().fold(0.0f64, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    HsiCube::from_bsq(
        rows,
        cols,
        bands,
        data.into_iter().map(|v| (v * scale) as f32).collect(),
    )
}

/// 3x3 box blur with edge clamping.
fn box_blur(map: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = (r as i64 + dr).clamp(0, rows as i64 - 1) as usize;
                    let cc = (c as i64 + dc).clamp(0, cols as i64 - 1) as usize;
                    acc += map[rr * cols + cc];
                }
            }
            out[r * cols + c] = acc / 9.0;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn paint_rectangle(
    map: &mut [f64],
    rows: usize,
    cols: usize,
    r0: usize,
    c0: usize,
    r1: usize,
    c1: usize,
    value: f64,
) {
    for r in r0..r1.min(rows) {
        for c in c0..c1.min(cols) {
            map[r * cols + c] = value;
        }
    }
}
