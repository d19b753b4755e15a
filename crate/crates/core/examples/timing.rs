//! Mean lookup latency from 2 to 2048 servers, written as CSV to stdout.
//!
//! cargo run --release --example timing > timing.csv

use hdhash::config::ExperimentConfig;
use hdhash::emulator::run_timing;

fn main() -> anyhow::Result<()> {
    let config = ExperimentConfig {
        seeds: vec![1],
        ..Default::default()
    };
    let report = run_timing(&config)?;
    report.write_csv(std::io::stdout().lock())?;
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    Ok(())
}
