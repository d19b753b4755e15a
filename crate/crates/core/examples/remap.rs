//! How many requests move when one server leaves or joins.

use hdhash::config::ExperimentConfig;
use hdhash::emulator::run_remap;

fn main() -> anyhow::Result<()> {
    let report = run_remap(&ExperimentConfig::default())?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    Ok(())
}
