//! The benchmark harness: repeated timed runs per (method, SNR) cell with
//! Olympic-scored averaging, metrics against the reference cube, and a
//! JSON-lines trace of every raw run.
//!
//! Timing covers the denoise call only. Noisy inputs are generated once per
//! SNR level from the configured seed, so every method in a run sees
//! bit-identical input, and cells run strictly sequentially to keep the
//! numbers honest.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cube::{denormalize_bands, normalize_bands, HsiCube};
use crate::denoise::{denoise, DenoiseParams, Method};
use crate::error::{HydeError, Result};
use crate::metrics;
use crate::noise::add_gaussian_noise_snr;
use crate::tiling::{plan_tiles, tiled_denoise};

/// Drop exactly one minimum and one maximum, then average the rest.
pub fn olympic_mean(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(HydeError::Parameter(format!(
            "Olympic scoring needs at least 3 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(HydeError::Parameter(
            "non-finite value in Olympic mean".into(),
        ));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    Ok((sum - min - max) / (values.len() - 2) as f64)
}

fn default_snr_levels() -> Vec<f64> {
    vec![20.0, 30.0, 40.0]
}

fn default_runs() -> usize {
    15
}

fn default_normalize() -> bool {
    true
}

fn default_workers() -> usize {
    1
}

/// One method entry in a benchmark configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: Method,
    #[serde(default)]
    pub params: DenoiseParams,
}

/// Tiled execution settings, `(rows, cols, bands)` per axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileSettings {
    pub tile: [usize; 3],
    pub overlap: [usize; 3],
    #[serde(default = "default_workers")]
    pub workers: usize,
}

/// Benchmark configuration, read from JSON by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Path of the clean reference cube.
    pub reference: PathBuf,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_snr_levels")]
    pub snr_levels_db: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Normalize each band to [0, 1] before the method and undo afterwards.
    #[serde(default = "default_normalize")]
    pub normalize: bool,
    #[serde(default)]
    pub tile: Option<TileSettings>,
    /// Where the JSON-lines per-run records go.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 3 {
            return Err(HydeError::Parameter(format!(
                "Olympic scoring needs at least 3 runs, got {}",
                self.runs
            )));
        }
        if self.methods.is_empty() {
            return Err(HydeError::Parameter("no methods configured".into()));
        }
        if self.snr_levels_db.iter().any(|v| !v.is_finite()) {
            return Err(HydeError::Parameter("SNR levels must be finite".into()));
        }
        Ok(())
    }
}

/// One raw timed run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub method: Method,
    pub snr_db: f64,
    pub run: usize,
    pub time_s: f64,
}

/// One aggregated (method, SNR) cell.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub method: Method,
    pub params: DenoiseParams,
    pub snr_in_db: f64,
    pub olympic_time_s: f64,
    pub psnr_db: f64,
    pub sam_rad: f64,
    pub mse: f64,
    pub snr_out_db: f64,
    /// Process high-water resident set after the cell, best effort.
    pub peak_rss_bytes: Option<u64>,
    pub error: Option<String>,
}

/// A full benchmark: aggregated cells plus every raw run.
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub version: String,
    pub seed: u64,
    pub normalize: bool,
    pub cells: Vec<BenchCell>,
    pub runs: Vec<RunRecord>,
}

/// Process peak resident set in bytes (Linux VmHWM, falling back to the
/// current VmRSS where the kernel omits the high-water mark; `None`
/// elsewhere). Either way it is a process-wide figure, so per-cell
/// attribution is approximate.
pub fn peak_rss_bytes() -> Option<u64> {
    #[cfg(target_os = "linux")]
    {
        let status = std::fs::read_to_string("/proc/self/status").ok()?;
        let parse = |prefix: &str| -> Option<u64> {
            for line in status.lines() {
                if let Some(rest) = line.strip_prefix(prefix) {
                    let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
                    return Some(kb * 1024);
                }
            }
            None
        };
        parse("VmHWM:").or_else(|| parse("VmRSS:"))
    }
    #[cfg(not(target_os = "linux"))]
    {
        None
    }
}

fn run_one(
    method: Method,
    params: &DenoiseParams,
    cube: &HsiCube,
    tile: &Option<TileSettings>,
) -> Result<HsiCube> {
    match tile {
        None => denoise(method, cube, params),
        Some(ts) => {
            let plan = plan_tiles(
                cube.dims(),
                (ts.tile[0], ts.tile[1], ts.tile[2]),
                (ts.overlap[0], ts.overlap[1], ts.overlap[2]),
            )?;
            tiled_denoise(method, params, cube, &plan, ts.workers)
        }
    }
}

/// Execute a benchmark. Method failures are recorded in their cell and the
/// remaining cells still run.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let reference = crate::io::load_cube(&cfg.reference)?;
    run_benchmark_on(cfg, &reference)
}

/// Same as [`run_benchmark`] with an already-loaded reference cube.
pub fn run_benchmark_on(cfg: &BenchmarkConfig, reference: &HsiCube) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let mut cells = Vec::new();
    let mut runs = Vec::new();

    for &snr in &cfg.snr_levels_db {
        // One noisy cube per SNR level; the seed mixes in the level so
        // different levels get different draws.
        let level_seed = cfg.seed ^ snr.to_bits();
        let noisy = add_gaussian_noise_snr(reference, snr, level_seed)?;
        let (method_input, record) = if cfg.normalize {
            let (n, r) = normalize_bands(&noisy);
            (n, Some(r))
        } else {
            (noisy.clone(), None)
        };

        for spec in &cfg.methods {
            let mut times = Vec::with_capacity(cfg.runs);
            let mut last_output: Option<HsiCube> = None;
            let mut cell_error: Option<String> = None;
            for run_idx in 0..cfg.runs {
                let started = Instant::now();
                match run_one(spec.name, &spec.params, &method_input, &cfg.tile) {
                    Ok(out) => {
                        let dt = started.elapsed().as_secs_f64();
                        times.push(dt);
                        runs.push(RunRecord {
                            method: spec.name,
                            snr_db: snr,
                            run: run_idx,
                            time_s: dt,
                        });
                        last_output = Some(out);
                    }
                    Err(e) => {
                        cell_error = Some(e.to_string());
                        break;
                    }
                }
            }

            let cell = match (&cell_error, last_output) {
                (None, Some(out)) => {
                    // Outputs are deterministic, so the last run stands in
                    // for all of them.
                    let estimate = match &record {
                        Some(r) => denormalize_bands(&out, r)?,
                        None => out,
                    };
                    let rep = metrics::report(reference, &estimate)?;
                    BenchCell {
                        method: spec.name,
                        params: spec.params.clone(),
                        snr_in_db: snr,
                        olympic_time_s: olympic_mean(&times)?,
                        psnr_db: rep.psnr_db,
                        sam_rad: rep.sam_rad,
                        mse: rep.mse,
                        snr_out_db: rep.snr_db,
                        peak_rss_bytes: peak_rss_bytes(),
                        error: None,
                    }
                }
                _ => BenchCell {
                    method: spec.name,
                    params: spec.params.clone(),
                    snr_in_db: snr,
                    olympic_time_s: f64::NAN,
                    psnr_db: f64::NAN,
                    sam_rad: f64::NAN,
                    mse: f64::NAN,
                    snr_out_db: f64::NAN,
                    peak_rss_bytes: peak_rss_bytes(),
                    error: cell_error,
                },
            };
            cells.push(cell);
        }
    }

    let report = BenchmarkReport {
        version: crate::VERSION.to_string(),
        seed: cfg.seed,
        normalize: cfg.normalize,
        cells,
        runs,
    };
    if let Some(path) = &cfg.output {
        write_jsonl(&report, path)?;
    }
    Ok(report)
}

/// One JSON line per raw run, each carrying enough context to trace its cell.
pub fn write_jsonl(report: &BenchmarkReport, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HydeError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for rec in &report.runs {
        let cell = report
            .cells
            .iter()
            .find(|c| c.method == rec.method && c.snr_in_db == rec.snr_db);
        let line = json!({
            "method": rec.method,
            "snr_in_db": rec.snr_db,
            "run": rec.run,
            "time_s": rec.time_s,
            "psnr_db": cell.map(|c| metrics::db_to_json(c.psnr_db)),
            "sam_rad": cell.map(|c| c.sam_rad),
            "params": cell.map(|c| &c.params),
            "seed": report.seed,
            "normalize": report.normalize,
            "version": report.version,
            "peak_rss_bytes": cell.and_then(|c| c.peak_rss_bytes),
        });
        writeln!(w, "{line}").map_err(|e| HydeError::io(path, e))?;
    }
    w.flush().map_err(|e| HydeError::io(path, e))?;
    Ok(())
}

/// Human-readable results table.
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>6} {:>10} {:>9} {:>11} {:>12}\n",
        "method", "snr", "psnr[dB]", "sam[rad]", "time[s]", "peak rss"
    ));
    for cell in &report.cells {
        if let Some(err) = &cell.error {
            out.push_str(&format!(
                "{:<10} {:>6} failed: {err}\n",
                cell.method.name(),
                cell.snr_in_db
            ));
            continue;
        }
        let rss = match cell.peak_rss_bytes {
            Some(b) => format!("{:.1} MiB*", b as f64 / (1024.0 * 1024.0)),
            None => "n/a".to_string(),
        };
        out.push_str(&format!(
            "{:<10} {:>6} {:>10.3} {:>9.4} {:>11.4} {:>12}\n",
            cell.method.name(),
            cell.snr_in_db,
            cell.psnr_db,
            cell.sam_rad,
            cell.olympic_time_s,
            rss
        ));
    }
    out.push_str("(*process high-water mark, approximate)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn olympic_examples() {
        assert_eq!(olympic_mean(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 3.0);
        assert_eq!(olympic_mean(&[7.0, 7.0, 7.0]).unwrap(), 7.0);
        assert!(matches!(
            olympic_mean(&[1.0, 2.0]),
            Err(HydeError::Parameter(_))
        ));
    }

    #[test]
    fn olympic_matches_brute_force_oracle() {
        let mut s = crate::rng::Stream::new(5, crate::rng::StreamId::Bench);
        for n in 3..=100 {
            let values: Vec<f64> = (0..n).map(|_| s.uniform_in(-50.0, 50.0)).collect();
            // Oracle: sort, strip the ends, average.
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let trimmed = &sorted[1..sorted.len() - 1];
            let oracle = trimmed.iter().sum::<f64>() / trimmed.len() as f64;
            let fast = olympic_mean(&values).unwrap();
            assert!(
                (fast - oracle).abs() <= 1e-12 * oracle.abs().max(1.0),
                "n={n}: {fast} vs {oracle}"
            );
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg: BenchmarkConfig =
            serde_json::from_str(r#"{"reference": "ref.hyde", "methods": [{"name": "hyres"}]}"#)
                .unwrap();
        assert_eq!(cfg.snr_levels_db, vec![20.0, 30.0, 40.0]);
        assert_eq!(cfg.runs, 15);
        assert!(cfg.normalize);
        assert!(cfg.validate().is_ok());

        let bad: BenchmarkConfig = serde_json::from_str(
            r#"{"reference": "ref.hyde", "methods": [{"name": "hyres"}], "runs": 2}"#,
        )
        .unwrap();
        assert!(matches!(bad.validate(), Err(HydeError::Parameter(_))));
    }

    #[test]
    fn smoke_benchmark_produces_a_sane_cell() {
        let reference = crate::synth::lowrank_cube(32, 32, 12, 3, 1).unwrap();
        let cfg = BenchmarkConfig {
            reference: PathBuf::from("unused"),
            methods: vec![MethodSpec {
                name: Method::Hyres,
                params: DenoiseParams::default(),
            }],
            snr_levels_db: vec![20.0],
            runs: 3,
            seed: 42,
            normalize: true,
            tile: None,
            output: None,
        };
        let report = run_benchmark_on(&cfg, &reference).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.runs.len(), 3);
        let cell = &report.cells[0];
        assert!(cell.error.is_none());
        assert!(cell.olympic_time_s > 0.0);
        let noisy = add_gaussian_noise_snr(&reference, 20.0, cfg.seed ^ 20.0f64.to_bits()).unwrap();
        let input_psnr = metrics::psnr(&reference, &noisy).unwrap();
        assert!(
            cell.psnr_db > input_psnr,
            "cell PSNR {:.2} should beat the noisy input {input_psnr:.2}",
            cell.psnr_db
        );
    }

    #[test]
    fn repeated_benchmarks_have_identical_quality_cells() {
        let reference = crate::synth::lowrank_cube(32, 32, 10, 2, 3).unwrap();
        let cfg = BenchmarkConfig {
            reference: PathBuf::from("unused"),
            methods: vec![
                MethodSpec {
                    name: Method::Forpdn,
                    params: DenoiseParams {
                        lambda: Some(5.0),
                        ..DenoiseParams::default()
                    },
                },
                MethodSpec {
                    name: Method::Hyres,
                    params: DenoiseParams::default(),
                },
            ],
            snr_levels_db: vec![20.0, 30.0],
            runs: 3,
            seed: 7,
            normalize: true,
            tile: None,
            output: None,
        };
        let a = run_benchmark_on(&cfg, &reference).unwrap();
        let b = run_benchmark_on(&cfg, &reference).unwrap();
        assert_eq!(a.cells.len(), b.cells.len());
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.psnr_db.to_bits(), cb.psnr_db.to_bits());
            assert_eq!(ca.sam_rad.to_bits(), cb.sam_rad.to_bits());
        }
    }

    #[test]
    fn failed_method_is_recorded_and_run_continues() {
        // More bands than pixels: the noise regression inside hyres is
        // underdetermined, while forpdn with an explicit lambda still works.
        let reference = crate::synth::lowrank_cube(4, 4, 17, 2, 4).unwrap();
        let noisy_ok = add_gaussian_noise_snr(&reference, 20.0, 1).is_ok();
        assert!(noisy_ok);
        let cfg = BenchmarkConfig {
            reference: PathBuf::from("unused"),
            methods: vec![
                MethodSpec {
                    name: Method::Hyres,
                    params: DenoiseParams::default(),
                },
                MethodSpec {
                    name: Method::Forpdn,
                    params: DenoiseParams {
                        lambda: Some(1.0),
                        ..DenoiseParams::default()
                    },
                },
            ],
            snr_levels_db: vec![20.0],
            runs: 3,
            seed: 5,
            normalize: false,
            tile: None,
            output: None,
        };
        let report = run_benchmark_on(&cfg, &reference).unwrap();
        assert_eq!(report.cells.len(), 2);
        assert!(report.cells[0].error.is_some());
        assert!(report.cells[1].error.is_none());
        let table = render_table(&report);
        assert!(table.contains("failed:"));
    }

    #[test]
    fn jsonl_has_one_line_per_run() {
        let reference = crate::synth::lowrank_cube(16, 16, 8, 2, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("runs.jsonl");
        let cfg = BenchmarkConfig {
            reference: PathBuf::from("unused"),
            methods: vec![MethodSpec {
                name: Method::Forpdn,
                params: DenoiseParams {
                    lambda: Some(1.0),
                    ..DenoiseParams::default()
                },
            }],
            snr_levels_db: vec![20.0],
            runs: 4,
            seed: 6,
            normalize: true,
            tile: None,
            output: Some(out.clone()),
        };
        run_benchmark_on(&cfg, &reference).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        for line in lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["method"], "forpdn");
            assert!(v["time_s"].as_f64().unwrap() > 0.0);
        }
    }
}
