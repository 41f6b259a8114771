//! Drive the benchmark harness from code: timed repetitions per
//! (method, SNR) cell, Olympic-scored averaging, and the JSON-lines trace.
//!
//! ```bash
//! cargo run -p hyde --example benchmark_run
//! ```

use hyde::bench::{render_table, run_benchmark_on, BenchmarkConfig, MethodSpec};
use hyde::denoise::{DenoiseParams, Method};
use hyde::synth::lowrank_cube;

fn main() -> hyde::Result<()> {
    let reference = lowrank_cube(48, 48, 20, 4, 77)?;
    let jsonl = std::env::temp_dir().join("hyde-example-benchmark.jsonl");

    let cfg = BenchmarkConfig {
        reference: "in-memory".into(),
        methods: vec![
            MethodSpec {
                name: Method::Hyres,
                params: DenoiseParams::default(),
            },
            MethodSpec {
                name: Method::Forpdn,
                params: DenoiseParams {
                    lambda: Some(5.0),
                    ..DenoiseParams::default()
                },
            },
            MethodSpec {
                name: Method::Wsrrr,
                params: DenoiseParams {
                    rank: Some(4),
                    ..DenoiseParams::default()
                },
            },
        ],
        snr_levels_db: vec![20.0, 30.0],
        runs: 5,
        seed: 7,
        normalize: true,
        tile: None,
        output: Some(jsonl.clone()),
    };

    let report = run_benchmark_on(&cfg, &reference)?;
    print!("{}", render_table(&report));
    println!(
        "{} raw runs traced to {}",
        report.runs.len(),
        jsonl.display()
    );
    Ok(())
}
