//! Hyperspectral image denoising in Rust.
//!
//! The crate bundles the pieces needed to denoise hyperspectral cubes end to
//! end and to measure how well it went:
//!
//! - [`cube`]: the [`HsiCube`] data model, band-wise normalization, and the
//!   pixels-by-bands unfolding; [`io`] reads and writes the `.hyde` container.
//! - [`transforms`]: 2-D wavelets, soft thresholding, spectral differences,
//!   economy SVD, and a split-Bregman total-variation solver.
//! - [`noise`]: seeded, bit-reproducible noise simulators (Gaussian at a
//!   target SNR, non-i.i.d. Gaussian, salt-and-pepper, dead columns, stripes)
//!   and a training-style augmentation pipeline.
//! - [`metrics`]: SNR, PSNR, spectral angle (SAM), and MSE.
//! - [`denoise`]: the denoisers themselves — HyRes, FORPDN, WSRRR, OTVCA,
//!   HyMiNoR — plus the HySime subspace and noise estimator.
//! - [`tiling`]: sliding-window inference with feathered overlap blending for
//!   cubes too large to denoise in one piece.
//! - [`mod@bench`]: a benchmark harness with Olympic-scored timings;
//!   [`synth`] generates low-rank ground-truth cubes for it.
//!
//! See the `examples/` directory for one runnable walkthrough per capability,
//! and the `hyde` binary for the command-line front end.

pub mod bench;
pub mod cube;
pub mod denoise;
pub mod error;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod synth;
pub mod tiling;
pub mod transforms;

pub use cube::{
    denormalize_bands, fold, normalize_bands, unfold, CubeMatrix, HsiCube, NormalizationRecord,
};
pub use denoise::{DenoiseParams, Method};
pub use error::{HydeError, Result};
pub use io::{load_cube, save_cube};
pub use metrics::MetricsReport;
pub use noise::NoiseSpec;

/// Crate version, echoed in benchmark reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
