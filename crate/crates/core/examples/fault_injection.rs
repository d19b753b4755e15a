//! Flip bits in a table's stored state and compare routing with a clean copy.

use hdhash::emulator::{assign, request_keys, server_ids};
use hdhash::faults::{inject_table, xor_popcount, NoiseSpec};
use hdhash::metrics::mismatch_rate;
use hdhash::{build_table, StrategyKind, TableParams};

fn main() -> anyhow::Result<()> {
    let params = TableParams {
        seed: 3,
        ..Default::default()
    };
    let keys = request_keys(3, 10_000);
    for kind in StrategyKind::ALL {
        let mut clean = build_table(kind, &params)?;
        for id in server_ids(128) {
            clean.join(id)?;
        }
        let baseline = assign(clean.as_ref(), &keys, 256)?;
        for spec in [NoiseSpec::single_bits(10, 9), NoiseSpec::burst(10, 9)] {
            let mut noisy = clean.snapshot();
            let flipped = inject_table(noisy.as_mut(), &spec)?;
            let diff = xor_popcount(&clean.surface_bytes(), &noisy.surface_bytes());
            let rate = mismatch_rate(&baseline, &assign(noisy.as_ref(), &keys, 256)?)?;
            println!(
                "{kind:<10} burst={:<2} surface={:>7} bits  flipped={diff} first at {:>7}  mismatch={:.2}%",
                spec.burst_length,
                noisy.corruption_surface().total_bits(),
                flipped[0],
                rate * 100.0
            );
        }
    }
    Ok(())
}
