//! Command-line front end: noise simulation, denoising, metrics, and the
//! benchmark harness. All the logic lives in the library; this binary only
//! parses arguments and maps errors to exit codes (0 ok, 2 usage/parameter,
//! 3 data/format, 4 method failure).

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use hyde::bench::{render_table, run_benchmark, BenchmarkConfig};
use hyde::denoise::{denoise, DenoiseParams, Method};
use hyde::error::{HydeError, Result};
use hyde::metrics::{db_to_json, psnr_with, PeakMode};
use hyde::noise::NoiseSpec;
use hyde::tiling::{plan_tiles, tiled_denoise};
use hyde::{denormalize_bands, load_cube, normalize_bands, save_cube};

#[derive(Parser)]
#[command(
    name = "hyde",
    version,
    about = "Hyperspectral image denoising toolbox"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// `RxCxB` triple, e.g. `64x64x16`.
#[derive(Debug, Clone, Copy)]
struct Dims3(usize, usize, usize);

impl FromStr for Dims3 {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        if parts.len() != 3 {
            return Err(format!("expected RxCxB, got {s:?}"));
        }
        let mut vals = [0usize; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p
                .parse()
                .map_err(|_| format!("bad dimension {p:?} in {s:?}"))?;
        }
        Ok(Dims3(vals[0], vals[1], vals[2]))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Apply a noise model to a cube.
    Simulate(SimulateArgs),
    /// Denoise a cube with a registered method.
    Denoise(DenoiseArgs),
    /// Print quality metrics for a (reference, estimate) pair as JSON.
    Metrics(MetricsArgs),
    /// Run a benchmark configuration and print the results table.
    Benchmark(BenchmarkArgs),
    /// Generate a synthetic ground-truth cube.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Noise spec as JSON, e.g. '{"kind":"gaussian_snr","target_snr_db":20,"seed":1234}'.
    #[arg(long)]
    noise: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DenoiseArgs {
    /// One of: hyres, forpdn, wsrrr, otvca, hyminor.
    #[arg(long)]
    method: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Method parameters as JSON, e.g. '{"rank":5,"lambda":0.1}'.
    #[arg(long)]
    params: Option<String>,
    /// Tile size RxCxB for sliding-window execution.
    #[arg(long)]
    tile: Option<Dims3>,
    /// Tile overlap RxCxB; requires --tile.
    #[arg(long, requires = "tile")]
    overlap: Option<Dims3>,
    /// Tiles processed concurrently.
    #[arg(long, default_value_t = 1)]
    tile_workers: usize,
    /// Normalize each band to [0, 1] before the method and undo afterwards.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
    /// PSNR peak: the reference's global maximum or per-band maxima.
    #[arg(long, value_parser = ["global", "per-band"], default_value = "global")]
    peak: String,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Benchmark configuration JSON file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "lowrank")]
    kind: String,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    bands: usize,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec: NoiseSpec = serde_json::from_str(&args.noise)
        .map_err(|e| HydeError::Parameter(format!("bad noise spec: {e}")))?;
    let cube = load_cube(&args.input)?;
    let noisy = spec.apply(&cube)?;
    save_cube(&noisy, &args.output)
}

fn cmd_denoise(args: &DenoiseArgs) -> Result<()> {
    let method = Method::parse(&args.method)?;
    let params: DenoiseParams = match &args.params {
        Some(text) => serde_json::from_str(text)
            .map_err(|e| HydeError::Parameter(format!("bad params: {e}")))?,
        None => DenoiseParams::default(),
    };
    let cube = load_cube(&args.input)?;
    let (input, record) = if args.normalize {
        let (n, r) = normalize_bands(&cube);
        (n, Some(r))
    } else {
        (cube, None)
    };
    let output = match args.tile {
        Some(Dims3(tr, tc, tb)) => {
            let Dims3(or_, oc, ob) = args.overlap.unwrap_or(Dims3(0, 0, 0));
            let plan = plan_tiles(input.dims(), (tr, tc, tb), (or_, oc, ob))?;
            tiled_denoise(method, &params, &input, &plan, args.tile_workers)?
        }
        None => denoise(method, &input, &params)?,
    };
    let output = match record {
        Some(r) => denormalize_bands(&output, &r)?,
        None => output,
    };
    save_cube(&output, &args.output)
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let reference = load_cube(&args.reference)?;
    let estimate = load_cube(&args.estimate)?;
    let mode = if args.peak == "per-band" {
        PeakMode::PerBand
    } else {
        PeakMode::Global
    };
    let mut report = hyde::metrics::report(&reference, &estimate)?;
    report.psnr_db = psnr_with(&reference, &estimate, mode)?;
    let mut json = report.to_json();
    json["psnr_db"] = db_to_json(report.psnr_db);
    println!("{json}");
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| HydeError::io(&args.config, e))?;
    let cfg: BenchmarkConfig = serde_json::from_str(&text)
        .map_err(|e| HydeError::Parameter(format!("bad benchmark config: {e}")))?;
    let report = run_benchmark(&cfg)?;
    print!("{}", render_table(&report));
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cube = hyde::synth::generate(
        &args.kind, args.rows, args.cols, args.bands, args.rank, args.seed,
    )?;
    save_cube(&cube, &args.output)
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Denoise(args) => cmd_denoise(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Synth(args) => cmd_synth(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
