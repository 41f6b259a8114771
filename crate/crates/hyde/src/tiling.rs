//! Sliding-window inference: slice a cube spatially and spectrally, run a
//! method on each tile, and re-assemble with feathered overlap blending.
//!
//! Border tiles shift inward instead of padding, so every tile lies inside
//! the cube. Each tile also carries a core range per axis (cut at overlap
//! midpoints); the cores exactly partition the cube, which pins down the
//! tile count. Blending weights are trapezoids — ramping across the overlap
//! region, flat inside — multiplied across axes and normalized per voxel, so
//! the weights form a partition of unity and an identity method reproduces
//! its input bit for bit. Accumulation runs in f64 (one extra cube-sized
//! buffer, twice the f32 payload) plus per-tile working memory.

use ndarray::s;
use rayon::prelude::*;

use crate::cube::HsiCube;
use crate::error::{HydeError, Result};

/// One tile: `[start, end)` plus the core sub-range per axis, in
/// (rows, cols, bands) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub range: [(usize, usize); 3],
    pub core: [(usize, usize); 3],
}

/// The full slicing schedule for one cube shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    pub dims: (usize, usize, usize),
    pub tile: (usize, usize, usize),
    pub overlap: (usize, usize, usize),
    /// Band-outer, then row, then column order.
    pub tiles: Vec<Tile>,
}

/// Closed-form tile count along one axis.
pub fn axis_tile_count(dim: usize, tile: usize, overlap: usize) -> usize {
    let tile = tile.min(dim);
    if tile == dim {
        1
    } else {
        (dim - overlap).div_ceil(tile - overlap)
    }
}

/// Tile starts along one axis; the last start clamps to `dim - tile`.
fn axis_starts(dim: usize, tile: usize, overlap: usize) -> Vec<usize> {
    let tile = tile.min(dim);
    let mut starts = Vec::new();
    let mut s = 0usize;
    loop {
        if s + tile >= dim {
            starts.push(dim - tile);
            break;
        }
        starts.push(s);
        s += tile - overlap;
    }
    starts
}

/// Per-axis (range, core) pairs; cores cut at overlap midpoints and
/// partition `[0, dim)` exactly.
fn axis_segments(dim: usize, tile: usize, overlap: usize) -> Vec<((usize, usize), (usize, usize))> {
    let tile = tile.min(dim);
    let starts = axis_starts(dim, tile, overlap);
    let n = starts.len();
    let mut segments = Vec::with_capacity(n);
    let mut core_start = 0usize;
    for (i, &s) in starts.iter().enumerate() {
        let end = s + tile;
        let core_end = if i + 1 == n {
            dim
        } else {
            (starts[i + 1] + end) / 2
        };
        segments.push(((s, end), (core_start, core_end)));
        core_start = core_end;
    }
    segments
}

/// Build the slicing schedule. Tiles larger than the cube clamp to it;
/// overlap must stay below the (clamped) tile size on every axis.
pub fn plan_tiles(
    dims: (usize, usize, usize),
    tile: (usize, usize, usize),
    overlap: (usize, usize, usize),
) -> Result<TilePlan> {
    let dims_arr = [dims.0, dims.1, dims.2];
    let tile_arr = [tile.0, tile.1, tile.2];
    let overlap_arr = [overlap.0, overlap.1, overlap.2];
    for axis in 0..3 {
        if dims_arr[axis] == 0 {
            return Err(HydeError::Parameter(
                "cube dimensions must be positive".into(),
            ));
        }
        if tile_arr[axis] == 0 {
            return Err(HydeError::Parameter(format!(
                "tile size must be positive on axis {axis}"
            )));
        }
        if overlap_arr[axis] >= tile_arr[axis].min(dims_arr[axis]) {
            return Err(HydeError::Parameter(format!(
                "overlap {} must be smaller than the tile ({}) on axis {axis}",
                overlap_arr[axis],
                tile_arr[axis].min(dims_arr[axis])
            )));
        }
    }

    let row_segs = axis_segments(dims.0, tile.0, overlap.0);
    let col_segs = axis_segments(dims.1, tile.1, overlap.1);
    let band_segs = axis_segments(dims.2, tile.2, overlap.2);
    let mut tiles = Vec::with_capacity(row_segs.len() * col_segs.len() * band_segs.len());
    for &(brange, bcore) in &band_segs {
        for &(rrange, rcore) in &row_segs {
            for &(crange, ccore) in &col_segs {
                tiles.push(Tile {
                    range: [rrange, crange, brange],
                    core: [rcore, ccore, bcore],
                });
            }
        }
    }
    debug_assert_eq!(
        tiles.len(),
        axis_tile_count(dims.0, tile.0, overlap.0)
            * axis_tile_count(dims.1, tile.1, overlap.1)
            * axis_tile_count(dims.2, tile.2, overlap.2)
    );
    Ok(TilePlan {
        dims,
        tile,
        overlap,
        tiles,
    })
}

/// Trapezoidal blending weight at `pos` for a tile spanning `[start, end)`
/// with the given overlap-length ramps. Strictly positive inside the tile.
fn axis_weight(pos: usize, start: usize, end: usize, overlap: usize) -> f64 {
    let ramp = (overlap + 1) as f64;
    let from_left = (pos - start + 1) as f64;
    let from_right = (end - pos) as f64;
    (from_left.min(from_right).min(ramp)) / ramp
}

fn extract_tile(cube: &HsiCube, tile: &Tile) -> HsiCube {
    let [(r0, r1), (c0, c1), (b0, b1)] = tile.range;
    let view = cube.array().slice(s![b0..b1, r0..r1, c0..c1]);
    HsiCube::from_array(view.to_owned()).expect("tile of a finite cube is finite")
}

/// Apply `method` tile by tile and blend. `workers` tiles run concurrently
/// (1 keeps execution strictly sequential for honest timings); blending
/// order is fixed by the plan, so results do not depend on `workers`.
pub fn tiled_apply<F>(cube: &HsiCube, plan: &TilePlan, workers: usize, method: F) -> Result<HsiCube>
where
    F: Fn(&HsiCube) -> Result<HsiCube> + Sync,
{
    if plan.dims != cube.dims() {
        return Err(HydeError::Shape(format!(
            "plan covers {:?}, cube is {:?}",
            plan.dims,
            cube.dims()
        )));
    }
    let (rows, cols, bands) = cube.dims();
    let workers = workers.max(1);

    // Per-axis weight-sum tables; the per-voxel normalizer is their product.
    let mut wsum_rows = vec![0.0f64; rows];
    let mut wsum_cols = vec![0.0f64; cols];
    let mut wsum_bands = vec![0.0f64; bands];
    {
        let row_segs = axis_segments(rows, plan.tile.0, plan.overlap.0);
        let col_segs = axis_segments(cols, plan.tile.1, plan.overlap.1);
        let band_segs = axis_segments(bands, plan.tile.2, plan.overlap.2);
        for &((s, e), _) in &row_segs {
            for (p, w) in wsum_rows.iter_mut().enumerate().take(e).skip(s) {
                *w += axis_weight(p, s, e, plan.overlap.0);
            }
        }
        for &((s, e), _) in &col_segs {
            for (p, w) in wsum_cols.iter_mut().enumerate().take(e).skip(s) {
                *w += axis_weight(p, s, e, plan.overlap.1);
            }
        }
        for &((s, e), _) in &band_segs {
            for (p, w) in wsum_bands.iter_mut().enumerate().take(e).skip(s) {
                *w += axis_weight(p, s, e, plan.overlap.2);
            }
        }
    }

    let mut acc = vec![0.0f64; rows * cols * bands];
    for chunk in plan.tiles.chunks(workers) {
        let outputs: Vec<(usize, HsiCube)> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, tile)| {
                let sub = extract_tile(cube, tile);
                let out = method(&sub).map_err(|e| {
                    HydeError::Method(format!(
                        "tile rows {:?} cols {:?} bands {:?}: {e}",
                        tile.range[0], tile.range[1], tile.range[2]
                    ))
                })?;
                if out.dims() != sub.dims() {
                    return Err(HydeError::Shape(format!(
                        "method returned {:?} for a {:?} tile",
                        out.dims(),
                        sub.dims()
                    )));
                }
                Ok((i, out))
            })
            .collect::<Result<Vec<_>>>()?;

        for (i, out) in outputs {
            let tile = &chunk[i];
            let [(r0, r1), (c0, c1), (b0, b1)] = tile.range;
            for b in b0..b1 {
                let wb = axis_weight(b, b0, b1, plan.overlap.2);
                let band = out.band(b - b0);
                for r in r0..r1 {
                    let wr = axis_weight(r, r0, r1, plan.overlap.0);
                    let tile_cols = c1 - c0;
                    let src_base = (r - r0) * tile_cols;
                    let dst_base = b * rows * cols + r * cols;
                    for c in c0..c1 {
                        let wc = axis_weight(c, c0, c1, plan.overlap.1);
                        acc[dst_base + c] += wb * wr * wc * f64::from(band[src_base + (c - c0)]);
                    }
                }
            }
        }
    }

    let mut data = Vec::with_capacity(rows * cols * bands);
    for b in 0..bands {
        for r in 0..rows {
            for c in 0..cols {
                let norm = wsum_bands[b] * wsum_rows[r] * wsum_cols[c];
                data.push((acc[b * rows * cols + r * cols + c] / norm) as f32);
            }
        }
    }
    cube.like_with_data(data)
}

/// Convenience wrapper running a registered denoiser through the plan.
pub fn tiled_denoise(
    method: crate::denoise::Method,
    params: &crate::denoise::DenoiseParams,
    cube: &HsiCube,
    plan: &TilePlan,
    workers: usize,
) -> Result<HsiCube> {
    tiled_apply(cube, plan, workers, |tile| {
        crate::denoise::denoise(method, tile, params)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Stream, StreamId};

    fn random_cube(rows: usize, cols: usize, bands: usize, seed: u64) -> HsiCube {
        let mut s = Stream::new(seed, StreamId::Synth);
        let data: Vec<f32> = (0..rows * cols * bands)
            .map(|_| s.uniform() as f32)
            .collect();
        HsiCube::from_bsq(rows, cols, bands, data).unwrap()
    }

    #[test]
    fn single_tile_plan() {
        let plan = plan_tiles((4, 4, 2), (4, 4, 2), (0, 0, 0)).unwrap();
        assert_eq!(plan.tiles.len(), 1);
        assert_eq!(plan.tiles[0].range, [(0, 4), (0, 4), (0, 2)]);
        assert_eq!(plan.tiles[0].core, [(0, 4), (0, 4), (0, 2)]);
    }

    #[test]
    fn row_axis_example() {
        // dims 10, tile 4, overlap 2 -> starts 0, 2, 4, 6.
        let plan = plan_tiles((10, 1, 1), (4, 1, 1), (2, 0, 0)).unwrap();
        assert_eq!(plan.tiles.len(), 4);
        let starts: Vec<usize> = plan.tiles.iter().map(|t| t.range[0].0).collect();
        assert_eq!(starts, vec![0, 2, 4, 6]);
        assert_eq!(axis_tile_count(10, 4, 2), 4);
    }

    #[test]
    fn overlap_equal_to_tile_is_parameter_error() {
        assert!(matches!(
            plan_tiles((8, 8, 4), (4, 4, 2), (4, 0, 0)),
            Err(HydeError::Parameter(_))
        ));
        assert!(matches!(
            plan_tiles((8, 8, 4), (0, 4, 2), (0, 0, 0)),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn tile_counts_match_closed_form_on_random_triples() {
        let mut s = Stream::new(99, StreamId::Synth);
        for _ in 0..200 {
            let dims = (2 + s.index(40), 2 + s.index(40), 1 + s.index(12));
            let tile = (
                1 + s.index(dims.0 + 3),
                1 + s.index(dims.1 + 3),
                1 + s.index(dims.2 + 3),
            );
            let eff = (tile.0.min(dims.0), tile.1.min(dims.1), tile.2.min(dims.2));
            let overlap = (s.index(eff.0), s.index(eff.1), s.index(eff.2));
            let plan = plan_tiles(dims, tile, overlap).unwrap();
            let expected = axis_tile_count(dims.0, tile.0, overlap.0)
                * axis_tile_count(dims.1, tile.1, overlap.1)
                * axis_tile_count(dims.2, tile.2, overlap.2);
            assert_eq!(
                plan.tiles.len(),
                expected,
                "dims {dims:?} tile {tile:?} overlap {overlap:?}"
            );
        }
    }

    #[test]
    fn cores_partition_the_cube() {
        let mut s = Stream::new(7, StreamId::Synth);
        for _ in 0..50 {
            let dims = (2 + s.index(20), 2 + s.index(20), 1 + s.index(6));
            let tile = (
                1 + s.index(dims.0),
                1 + s.index(dims.1),
                1 + s.index(dims.2),
            );
            let overlap = (
                s.index(tile.0.min(dims.0)),
                s.index(tile.1.min(dims.1)),
                s.index(tile.2.min(dims.2)),
            );
            let plan = plan_tiles(dims, tile, overlap).unwrap();
            let mut cover = vec![0u8; dims.0 * dims.1 * dims.2];
            for t in &plan.tiles {
                let [(r0, r1), (c0, c1), (b0, b1)] = t.core;
                for b in b0..b1 {
                    for r in r0..r1 {
                        for c in c0..c1 {
                            cover[(b * dims.0 + r) * dims.1 + c] += 1;
                        }
                    }
                }
                // Cores must sit inside their tile ranges.
                for axis in 0..3 {
                    assert!(t.core[axis].0 >= t.range[axis].0);
                    assert!(t.core[axis].1 <= t.range[axis].1);
                }
            }
            assert!(
                cover.iter().all(|&v| v == 1),
                "core cover not exact for dims {dims:?} tile {tile:?} overlap {overlap:?}"
            );
        }
    }

    #[test]
    fn identity_method_is_bit_exact() {
        let mut s = Stream::new(21, StreamId::Synth);
        for trial in 0..20 {
            let dims = (3 + s.index(20), 3 + s.index(20), 1 + s.index(8));
            let tile = (
                1 + s.index(dims.0),
                1 + s.index(dims.1),
                1 + s.index(dims.2),
            );
            let overlap = (
                s.index(tile.0.min(dims.0)),
                s.index(tile.1.min(dims.1)),
                s.index(tile.2.min(dims.2)),
            );
            let cube = random_cube(dims.0, dims.1, dims.2, 500 + trial);
            let plan = plan_tiles(dims, tile, overlap).unwrap();
            let out = tiled_apply(&cube, &plan, 1, |t| Ok(t.clone())).unwrap();
            assert!(
                out.bit_identical(&cube),
                "identity blend drifted: dims {dims:?} tile {tile:?} overlap {overlap:?}"
            );
        }
    }

    #[test]
    fn workers_do_not_change_the_result() {
        let cube = random_cube(16, 16, 6, 3);
        let plan = plan_tiles((16, 16, 6), (8, 8, 3), (4, 4, 1)).unwrap();
        let negate = |t: &HsiCube| t.like_with_data(t.as_bsq_slice().iter().map(|&v| -v).collect());
        let one = tiled_apply(&cube, &plan, 1, negate).unwrap();
        let four = tiled_apply(&cube, &plan, 4, negate).unwrap();
        assert!(one.bit_identical(&four));
    }

    #[test]
    fn failing_method_names_the_tile() {
        let cube = random_cube(8, 8, 2, 4);
        let plan = plan_tiles((8, 8, 2), (4, 8, 2), (0, 0, 0)).unwrap();
        let err = tiled_apply(&cube, &plan, 1, |t| {
            if t.value(0, 0, 0) >= 0.0 {
                Err(HydeError::Method("boom".into()))
            } else {
                Ok(t.clone())
            }
        })
        .unwrap_err();
        match err {
            HydeError::Method(msg) => {
                assert!(msg.contains("rows"), "{msg}");
                assert!(msg.contains("boom"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn plan_cube_mismatch_is_shape_error() {
        let cube = random_cube(8, 8, 2, 5);
        let plan = plan_tiles((9, 8, 2), (4, 8, 2), (0, 0, 0)).unwrap();
        assert!(matches!(
            tiled_apply(&cube, &plan, 1, |t| Ok(t.clone())),
            Err(HydeError::Shape(_))
        ));
    }

    #[test]
    fn tiled_forpdn_matches_untiled_with_wide_overlap() {
        use crate::denoise::{denoise, DenoiseParams, Method};
        let clean = crate::synth::lowrank_cube(64, 64, 16, 3, 6).unwrap();
        let noisy = crate::noise::add_gaussian_noise_snr(&clean, 20.0, 7).unwrap();
        let params = DenoiseParams {
            lambda: Some(5.0),
            ..DenoiseParams::default()
        };
        let untiled = denoise(Method::Forpdn, &noisy, &params).unwrap();
        // Spatial-only tiling, overlap at twice the longest filter support.
        let plan = plan_tiles((64, 64, 16), (48, 48, 16), (32, 32, 0)).unwrap();
        let tiled = tiled_denoise(Method::Forpdn, &params, &noisy, &plan, 1).unwrap();
        let max_err = untiled
            .as_bsq_slice()
            .iter()
            .zip(tiled.as_bsq_slice())
            .map(|(&a, &b)| (f64::from(a) - f64::from(b)).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-3, "tiled vs untiled max abs {max_err}");
    }

    #[test]
    fn band_sliced_hyres_improves_psnr() {
        use crate::denoise::{DenoiseParams, Method};
        let clean = crate::synth::lowrank_cube(48, 48, 24, 4, 8).unwrap();
        let noisy = crate::noise::add_gaussian_noise_snr(&clean, 20.0, 9).unwrap();
        let plan = plan_tiles((48, 48, 24), (48, 48, 12), (0, 0, 4)).unwrap();
        assert!(plan.tiles.len() > 1);
        let out =
            tiled_denoise(Method::Hyres, &DenoiseParams::default(), &noisy, &plan, 1).unwrap();
        let before = crate::metrics::psnr(&clean, &noisy).unwrap();
        let after = crate::metrics::psnr(&clean, &out).unwrap();
        assert!(after > before, "band-sliced run should still denoise");
    }
}
