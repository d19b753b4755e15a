use super::{position_of, HashTable, RequestId, ServerId, StrategyKind};
use crate::error::{Error, Result};
use crate::faults::CorruptionSurface;
use crate::hash::hash64;

/// Ring of raw 64-bit server hashes, one point per server.
///
/// `positions` is kept sorted by joins and leaves but is searched in place,
/// so a corrupted entry is not re-sorted and the binary search runs over
/// whatever order the memory now holds.
#[derive(Debug, Clone)]
pub struct ConsistentTable {
    seed: u64,
    positions: Vec<u64>,
    owners: Vec<ServerId>,
}

/// First index whose position is `>= point`, by plain bisection.
///
/// Written out instead of `partition_point` so the probe sequence over an
/// unsorted (corrupted) array is fixed by this crate.
fn successor(positions: &[u64], point: u64) -> usize {
    let (mut lo, mut hi) = (0, positions.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if positions[mid] < point {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

impl ConsistentTable {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            positions: Vec::new(),
            owners: Vec::new(),
        }
    }

    /// Ring position of a server or request.
    pub fn position(&self, bytes: &[u8]) -> u64 {
        hash64(bytes, self.seed)
    }

    /// Server positions as stored.
    pub fn positions(&self) -> &[u64] {
        &self.positions
    }
}

impl HashTable for ConsistentTable {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Consistent
    }

    fn join(&mut self, server: ServerId) -> Result<()> {
        if self.owners.contains(&server) {
            return Err(Error::DuplicateServer(server.to_string()));
        }
        let pos = self.position(server.as_bytes());
        let mut i = successor(&self.positions, pos);
        // equal positions stay ordered by id so the smallest id wins ties
        while i < self.positions.len() && self.positions[i] == pos && self.owners[i] < server {
            i += 1;
        }
        self.positions.insert(i, pos);
        self.owners.insert(i, server);
        Ok(())
    }

    fn leave(&mut self, server: &ServerId) -> Result<()> {
        let i = position_of(&self.owners, server)?;
        self.positions.remove(i);
        self.owners.remove(i);
        Ok(())
    }

    fn lookup(&self, request: &RequestId) -> Result<&ServerId> {
        if self.positions.is_empty() {
            return Err(Error::EmptyTable);
        }
        let i = successor(&self.positions, self.position(request.as_bytes()));
        Ok(&self.owners[if i == self.positions.len() { 0 } else { i }])
    }

    fn server_count(&self) -> usize {
        self.owners.len()
    }

    fn servers(&self) -> Vec<ServerId> {
        self.owners.clone()
    }

    fn corruption_surface(&mut self) -> CorruptionSurface<'_> {
        let mut s = CorruptionSurface::new();
        s.push_u64s(&mut self.positions);
        s
    }

    fn surface_bytes(&self) -> Vec<u8> {
        self.positions.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn snapshot(&self) -> Box<dyn HashTable> {
        Box::new(self.clone())
    }
}
