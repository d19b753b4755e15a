//! Dynamic hash tables behind one interface.
//!
//! Every strategy stores per-server state at join time and answers lookups
//! from that stored state only, so corrupting it (see [`crate::faults`])
//! changes what lookups return.

mod consistent;
mod hd;
mod modular;
mod rendezvous;

pub use consistent::ConsistentTable;
pub use hd::{HdConfig, HdTable};
pub use modular::ModularTable;
pub use rendezvous::RendezvousTable;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::faults::CorruptionSurface;

/// Opaque, non-empty server identifier. Ordered lexicographically by bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ServerId(Vec<u8>);

impl ServerId {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(Error::EmptyId);
        }
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub(crate) fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl std::fmt::Display for ServerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

impl std::fmt::Debug for ServerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ServerId({self})")
    }
}

/// Opaque, non-empty request key.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestId(Vec<u8>);

impl RequestId {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(Error::EmptyId);
        }
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl std::fmt::Display for RequestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

impl std::fmt::Debug for RequestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RequestId({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Modular,
    Consistent,
    Rendezvous,
    Hd,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Modular,
        StrategyKind::Consistent,
        StrategyKind::Rendezvous,
        StrategyKind::Hd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Modular => "modular",
            StrategyKind::Consistent => "consistent",
            StrategyKind::Rendezvous => "rendezvous",
            StrategyKind::Hd => "hd",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy {s:?}")))
    }
}

/// The dynamic hash table contract shared by all strategies.
pub trait HashTable: Send + Sync {
    fn kind(&self) -> StrategyKind;

    fn join(&mut self, server: ServerId) -> Result<()>;

    fn leave(&mut self, server: &ServerId) -> Result<()>;

    fn lookup(&self, request: &RequestId) -> Result<&ServerId>;

    /// Order-preserving; identical to calling [`HashTable::lookup`] per element.
    fn batch_lookup(&self, requests: &[RequestId]) -> Result<Vec<ServerId>> {
        requests
            .par_iter()
            .map(|r| self.lookup(r).cloned())
            .collect()
    }

    fn server_count(&self) -> usize;

    /// Server ids as currently stored (corrupted ids show up corrupted).
    fn servers(&self) -> Vec<ServerId>;

    fn corruption_surface(&mut self) -> CorruptionSurface<'_>;

    /// Same bytes as `corruption_surface().to_bytes()`, without needing `&mut`.
    fn surface_bytes(&self) -> Vec<u8>;

    /// Deep copy of the current state.
    fn snapshot(&self) -> Box<dyn HashTable>;
}

/// Parameters needed to build any strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableParams {
    pub seed: u64,
    pub dim: usize,
    pub n: usize,
}

impl Default for TableParams {
    fn default() -> Self {
        Self {
            seed: 0,
            dim: crate::hypervector::DEFAULT_DIM,
            n: hd::DEFAULT_CARDINALITY,
        }
    }
}

pub fn build_table(kind: StrategyKind, params: &TableParams) -> Result<Box<dyn HashTable>> {
    Ok(match kind {
        StrategyKind::Modular => Box::new(ModularTable::new(params.seed)),
        StrategyKind::Consistent => Box::new(ConsistentTable::new(params.seed)),
        StrategyKind::Rendezvous => Box::new(RendezvousTable::new(params.seed)),
        StrategyKind::Hd => Box::new(HdTable::new(HdConfig {
            n: params.n,
            dim: params.dim,
            seed: params.seed,
        })?),
    })
}

fn ensure_absent(ids: &[ServerId], id: &ServerId) -> Result<()> {
    if ids.contains(id) {
        return Err(Error::DuplicateServer(id.to_string()));
    }
    Ok(())
}

fn position_of(ids: &[ServerId], id: &ServerId) -> Result<usize> {
    ids.iter()
        .position(|s| s == id)
        .ok_or_else(|| Error::UnknownServer(id.to_string()))
}

/// Argmax over `(key, id)` pairs; equal keys go to the smallest id.
fn pick_best<'a, K: Ord>(candidates: impl Iterator<Item = (K, &'a ServerId)>) -> Option<&'a ServerId> {
    candidates
        .reduce(|best, cand| match cand.0.cmp(&best.0) {
            std::cmp::Ordering::Greater => cand,
            std::cmp::Ordering::Equal if cand.1 < best.1 => cand,
            _ => best,
        })
        .map(|(_, id)| id)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn sid(s: &str) -> ServerId {
        ServerId::new(s).unwrap()
    }

    pub fn rid(i: usize) -> RequestId {
        RequestId::new(format!("req-{i}")).unwrap()
    }

    pub fn small_params() -> TableParams {
        TableParams {
            seed: 11,
            dim: 2048,
            n: 256,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    fn all_tables() -> Vec<Box<dyn HashTable>> {
        StrategyKind::ALL
            .into_iter()
            .map(|k| build_table(k, &small_params()).unwrap())
            .collect()
    }

    #[test]
    fn pick_best_breaks_ties_by_smallest_id() {
        let (a, b, c) = (sid("a"), sid("b"), sid("c"));
        let got = pick_best([(5u64, &c), (7, &b), (7, &a), (1, &a)].into_iter());
        assert_eq!(got, Some(&a));
        let got = pick_best([(7u64, &a), (7, &b)].into_iter());
        assert_eq!(got, Some(&a));
        assert_eq!(pick_best(std::iter::empty::<(u64, &ServerId)>()), None);
    }

    #[test]
    fn ids_must_be_non_empty() {
        assert_eq!(ServerId::new(""), Err(Error::EmptyId));
        assert_eq!(RequestId::new(Vec::new()), Err(Error::EmptyId));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("maglev".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn empty_table_lookup_fails() {
        for t in all_tables() {
            assert_eq!(t.lookup(&rid(0)), Err(Error::EmptyTable), "{}", t.kind());
        }
    }

    #[test]
    fn single_server_gets_everything() {
        for mut t in all_tables() {
            t.join(sid("only")).unwrap();
            for i in 0..200 {
                assert_eq!(t.lookup(&rid(i)).unwrap(), &sid("only"));
            }
        }
    }

    #[test]
    fn duplicate_join_and_unknown_leave_fail() {
        for mut t in all_tables() {
            t.join(sid("a")).unwrap();
            assert!(matches!(t.join(sid("a")), Err(Error::DuplicateServer(_))));
            assert!(matches!(t.leave(&sid("b")), Err(Error::UnknownServer(_))));
            t.leave(&sid("a")).unwrap();
            assert_eq!(t.lookup(&rid(1)), Err(Error::EmptyTable));
            assert_eq!(t.server_count(), 0);
        }
    }

    #[test]
    fn batch_matches_elementwise() {
        let reqs: Vec<RequestId> = (0..1000).map(rid).collect();
        for mut t in all_tables() {
            for i in 0..37 {
                t.join(sid(&format!("server-{i}"))).unwrap();
            }
            let batch = t.batch_lookup(&reqs).unwrap();
            for (r, s) in reqs.iter().zip(&batch) {
                assert_eq!(t.lookup(r).unwrap(), s);
                assert_eq!(t.lookup(r).unwrap(), s);
            }
        }
    }

    #[test]
    fn join_then_leave_restores_lookups() {
        let reqs: Vec<RequestId> = (0..2000).map(rid).collect();
        for kind in [StrategyKind::Consistent, StrategyKind::Rendezvous, StrategyKind::Hd] {
            let mut t = build_table(kind, &small_params()).unwrap();
            for i in 0..20 {
                t.join(sid(&format!("server-{i}"))).unwrap();
            }
            let before = t.batch_lookup(&reqs).unwrap();
            t.join(sid("newcomer")).unwrap();
            t.leave(&sid("newcomer")).unwrap();
            assert_eq!(t.batch_lookup(&reqs).unwrap(), before, "{kind}");
        }
    }

    #[test]
    fn snapshot_is_independent() {
        for mut t in all_tables() {
            for i in 0..8 {
                t.join(sid(&format!("server-{i}"))).unwrap();
            }
            let snap = t.snapshot();
            let before = snap.surface_bytes();
            let bits = t.corruption_surface().total_bits();
            for b in (0..bits).step_by(7) {
                t.corruption_surface().toggle(b);
            }
            assert_eq!(snap.surface_bytes(), before);
            assert_ne!(t.surface_bytes(), before);
        }
    }

    #[test]
    fn surface_bytes_match_surface_view() {
        for mut t in all_tables() {
            for i in 0..5 {
                t.join(sid(&format!("s{i}"))).unwrap();
            }
            t.corruption_surface().toggle(3);
            let direct = t.surface_bytes();
            assert_eq!(t.corruption_surface().to_bytes(), direct, "{}", t.kind());
        }
    }

    #[test]
    fn surface_sizes() {
        let names: Vec<String> = (0..10).map(|i| format!("server-{i}")).collect();
        let id_bytes: usize = names.iter().map(|n| n.len()).sum();
        for mut t in all_tables() {
            for n in &names {
                t.join(sid(n)).unwrap();
            }
            let expected = match t.kind() {
                StrategyKind::Modular | StrategyKind::Consistent => 64 * 10,
                StrategyKind::Rendezvous => 8 * id_bytes,
                StrategyKind::Hd => 10 * small_params().dim,
            };
            assert_eq!(t.corruption_surface().total_bits(), expected, "{}", t.kind());
        }
    }
}
