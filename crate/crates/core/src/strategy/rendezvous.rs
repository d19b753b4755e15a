use super::{ensure_absent, pick_best, position_of, HashTable, RequestId, ServerId, StrategyKind};
use crate::error::{Error, Result};
use crate::faults::CorruptionSurface;
use crate::hash::hash_pair;

/// Highest random weight: `argmax_s h(s, r)`, ties to the smallest id.
///
/// The stored state is the list of server id byte strings; lookups score
/// and return the stored bytes.
#[derive(Debug, Clone)]
pub struct RendezvousTable {
    seed: u64,
    ids: Vec<ServerId>,
}

impl RendezvousTable {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ids: Vec::new(),
        }
    }

    pub fn score(&self, server: &ServerId, request: &RequestId) -> u64 {
        hash_pair(server.as_bytes(), request.as_bytes(), self.seed)
    }
}

impl HashTable for RendezvousTable {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Rendezvous
    }

    fn join(&mut self, server: ServerId) -> Result<()> {
        ensure_absent(&self.ids, &server)?;
        self.ids.push(server);
        Ok(())
    }

    fn leave(&mut self, server: &ServerId) -> Result<()> {
        let i = position_of(&self.ids, server)?;
        self.ids.remove(i);
        Ok(())
    }

    fn lookup(&self, request: &RequestId) -> Result<&ServerId> {
        pick_best(self.ids.iter().map(|id| (self.score(id, request), id))).ok_or(Error::EmptyTable)
    }

    fn server_count(&self) -> usize {
        self.ids.len()
    }

    fn servers(&self) -> Vec<ServerId> {
        self.ids.clone()
    }

    fn corruption_surface(&mut self) -> CorruptionSurface<'_> {
        let mut s = CorruptionSurface::new();
        for id in self.ids.iter_mut() {
            s.push_bytes(id.bytes_mut());
        }
        s
    }

    fn surface_bytes(&self) -> Vec<u8> {
        self.ids.iter().flat_map(|id| id.as_bytes().to_vec()).collect()
    }

    fn snapshot(&self) -> Box<dyn HashTable> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::test_support::*;

    fn table(k: usize) -> RendezvousTable {
        let mut t = RendezvousTable::new(4);
        for i in 0..k {
            t.join(sid(&format!("server-{i}"))).unwrap();
        }
        t
    }

    fn ranked(t: &RendezvousTable, r: &RequestId) -> Vec<ServerId> {
        let mut ids = t.ids.clone();
        ids.sort_by(|a, b| t.score(b, r).cmp(&t.score(a, r)).then(a.cmp(b)));
        ids
    }

    #[test]
    fn picks_highest_score() {
        let t = table(40);
        for i in 0..500 {
            let r = rid(i);
            assert_eq!(t.lookup(&r).unwrap(), &ranked(&t, &r)[0]);
        }
    }

    #[test]
    fn removing_non_winner_keeps_assignment() {
        let mut t = table(10);
        let r = rid(3);
        let order = ranked(&t, &r);
        t.leave(&order[4]).unwrap();
        assert_eq!(t.lookup(&r).unwrap(), &order[0]);
    }

    #[test]
    fn removing_winner_falls_to_runner_up() {
        for i in 0..50 {
            let mut t = table(10);
            let r = rid(i);
            let order = ranked(&t, &r);
            t.leave(&order[0]).unwrap();
            assert_eq!(t.lookup(&r).unwrap(), &order[1]);
        }
    }

    #[test]
    fn corrupted_id_is_returned_as_stored() {
        let mut t = table(1);
        t.corruption_surface().toggle(0);
        let got = t.lookup(&rid(0)).unwrap();
        assert_eq!(got.as_bytes()[0], b's' ^ 1);
    }
}
