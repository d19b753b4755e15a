//! The four strategies behind one interface: build, route, and resize.

use hdhash::emulator::{request_keys, server_ids};
use hdhash::{build_table, ServerId, StrategyKind, TableParams};

fn main() -> anyhow::Result<()> {
    let params = TableParams {
        seed: 1,
        ..Default::default()
    };
    let keys = request_keys(1, 5);
    for kind in StrategyKind::ALL {
        let mut table = build_table(kind, &params)?;
        for id in server_ids(8) {
            table.join(id)?;
        }
        let before = table.batch_lookup(&keys)?;
        table.join(ServerId::new("server-9")?)?;
        let after = table.batch_lookup(&keys)?;
        println!("{kind}");
        for ((r, a), b) in keys.iter().zip(&before).zip(&after) {
            let mark = if a == b { "" } else { "  (moved)" };
            println!("  {r:>20} -> {a} / {b}{mark}");
        }
    }
    Ok(())
}
