//! Mismatch rate under single-bit upsets and multi-cell bursts at 512 servers.
//!
//! cargo run --release --example robustness

use hdhash::config::{BurstMode, ExperimentConfig};
use hdhash::emulator::{run_robustness, Metric, NOISY_STRATEGIES};

fn main() -> anyhow::Result<()> {
    for burst in [BurstMode::Single, BurstMode::Mcu] {
        let config = ExperimentConfig {
            servers: Some(vec![512]),
            noise: vec![0, 2, 4, 6, 8, 10],
            burst,
            ..Default::default()
        };
        let report = run_robustness(&config)?;
        println!("{burst:?}");
        for s in NOISY_STRATEGIES {
            let row: Vec<String> = config
                .noise
                .iter()
                .map(|&l| {
                    let v = report.values(s, 512, l, Metric::MismatchRate);
                    let m = report.median(s, 512, l, Metric::MismatchRate).unwrap();
                    format!("{l:>2}: {:.4} {:?}", m, v)
                })
                .collect();
            println!("  {s}");
            for r in row {
                println!("    {r}");
            }
        }
    }
    Ok(())
}
