//! Similarity matrices of random, level, and circular basis sets.
//!
//! cargo run --release --example basis_profiles

use hdhash::basis::{similarity_profile, BasisKind, BasisSet};

fn main() -> anyhow::Result<()> {
    for kind in [BasisKind::Random, BasisKind::Level, BasisKind::Circular] {
        let set = BasisSet::generate(kind, 12, 10_000, 7)?;
        let profile = similarity_profile(&set);
        println!("{kind}");
        for i in 0..profile.n() {
            let row: Vec<String> = profile.row(i).iter().map(|s| format!("{s:5.2}")).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
