//! Chi-squared load balance at 64 servers, clean and with 10 bit errors.
//!
//! cargo run --release --example uniformity

use hdhash::config::ExperimentConfig;
use hdhash::emulator::run_uniformity;

fn main() -> anyhow::Result<()> {
    let config = ExperimentConfig {
        servers: Some(vec![64]),
        noise: vec![0, 10],
        seeds: (1..=10).collect(),
        ..Default::default()
    };
    for line in run_uniformity(&config)?.summary_lines() {
        println!("{line}");
    }
    Ok(())
}
