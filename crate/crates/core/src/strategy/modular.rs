use super::{ensure_absent, position_of, HashTable, RequestId, ServerId, StrategyKind};
use crate::error::{Error, Result};
use crate::faults::CorruptionSurface;
use crate::hash::hash64;

/// `hash(r) mod k` over servers in join order.
///
/// The stored state is a slot array of 64-bit join-order indices; slot `i`
/// normally holds `i`. A corrupted slot value is reduced modulo `k`.
#[derive(Debug, Clone)]
pub struct ModularTable {
    seed: u64,
    servers: Vec<ServerId>,
    slots: Vec<u64>,
}

impl ModularTable {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            servers: Vec::new(),
            slots: Vec::new(),
        }
    }

    fn reindex(&mut self) {
        self.slots = (0..self.servers.len() as u64).collect();
    }
}

impl HashTable for ModularTable {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Modular
    }

    fn join(&mut self, server: ServerId) -> Result<()> {
        ensure_absent(&self.servers, &server)?;
        self.servers.push(server);
        self.slots.push(self.servers.len() as u64 - 1);
        Ok(())
    }

    fn leave(&mut self, server: &ServerId) -> Result<()> {
        let i = position_of(&self.servers, server)?;
        self.servers.remove(i);
        self.reindex();
        Ok(())
    }

    fn lookup(&self, request: &RequestId) -> Result<&ServerId> {
        let k = self.servers.len() as u64;
        if k == 0 {
            return Err(Error::EmptyTable);
        }
        let slot = self.slots[(hash64(request.as_bytes(), self.seed) % k) as usize];
        Ok(&self.servers[(slot % k) as usize])
    }

    fn server_count(&self) -> usize {
        self.servers.len()
    }

    fn servers(&self) -> Vec<ServerId> {
        self.servers.clone()
    }

    fn corruption_surface(&mut self) -> CorruptionSurface<'_> {
        let mut s = CorruptionSurface::new();
        s.push_u64s(&mut self.slots);
        s
    }

    fn surface_bytes(&self) -> Vec<u8> {
        self.slots.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn snapshot(&self) -> Box<dyn HashTable> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::test_support::*;

    fn table(names: &[&str]) -> ModularTable {
        let mut t = ModularTable::new(5);
        for n in names {
            t.join(sid(n)).unwrap();
        }
        t
    }

    #[test]
    fn index_is_hash_mod_k_in_join_order() {
        let t = table(&["c", "a", "b", "d"]);
        for i in 0..500 {
            let r = rid(i);
            let idx = (hash64(r.as_bytes(), 5) % 4) as usize;
            assert_eq!(t.lookup(&r).unwrap(), &t.servers[idx]);
        }
    }

    #[test]
    fn leave_reindexes_join_order() {
        let mut t = table(&["a", "b", "c", "d"]);
        t.leave(&sid("b")).unwrap();
        let order = [sid("a"), sid("c"), sid("d")];
        for i in 0..500 {
            let r = rid(i);
            let idx = (hash64(r.as_bytes(), 5) % 3) as usize;
            assert_eq!(t.lookup(&r).unwrap(), &order[idx]);
        }
    }

    #[test]
    fn growing_by_one_moves_most_requests() {
        let names: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
        let mut t = ModularTable::new(1);
        for n in &names[..4] {
            t.join(sid(n)).unwrap();
        }
        let reqs: Vec<_> = (0..10_000).map(rid).collect();
        let before = t.batch_lookup(&reqs).unwrap();
        t.join(sid(&names[4])).unwrap();
        let after = t.batch_lookup(&reqs).unwrap();
        let moved = before.iter().zip(&after).filter(|(a, b)| a != b).count();
        assert!(moved as f64 / 10_000.0 > 0.5);
    }

    #[test]
    fn corrupted_slot_redirects() {
        let mut t = table(&["a", "b"]);
        // slot 0 -> 0 becomes 2, which wraps back to 0; slot 1 -> 1 becomes 0
        t.corruption_surface().toggle(1);
        t.corruption_surface().toggle(64);
        assert_eq!(t.slots, vec![2, 0]);
        for i in 0..100 {
            assert_eq!(t.lookup(&rid(i)).unwrap(), &sid("a"));
        }
    }
}
