use std::cmp::Reverse;
use std::sync::Arc;

use super::{ensure_absent, pick_best, position_of, HashTable, RequestId, ServerId, StrategyKind};
use crate::basis::{BasisKind, BasisSet};
use crate::error::{Error, Result};
use crate::faults::CorruptionSurface;
use crate::hash::hash64;
use crate::hypervector::{Hypervector, DEFAULT_DIM};

/// Circular-set size used by default; a power of two at least 4x the
/// largest server pool the experiments build (2048).
pub const DEFAULT_CARDINALITY: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HdConfig {
    /// Cardinality of the circular basis; must stay above the server count.
    pub n: usize,
    pub dim: usize,
    /// Seeds both the circular basis and the key hash.
    pub seed: u64,
}

impl Default for HdConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_CARDINALITY,
            dim: DEFAULT_DIM,
            seed: 0,
        }
    }
}

impl HdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        let min_dim = if self.n.is_multiple_of(2) { self.n } else { 2 * self.n };
        if self.dim < min_dim {
            return Err(Error::InvalidConfig(format!(
                "d={} is too small for a circular set of n={}",
                self.dim, self.n
            )));
        }
        Ok(())
    }
}

/// Hyperdimensional hashing.
///
/// Servers and requests are encoded as `C[hash(x) mod n]` where `C` is a
/// circular basis set. A request goes to the stored server hypervector with
/// the highest similarity (lowest Hamming distance), ties to the smallest id.
#[derive(Debug, Clone)]
pub struct HdTable {
    config: HdConfig,
    basis: Arc<BasisSet>,
    servers: Vec<ServerId>,
    vectors: Vec<Hypervector>,
}

impl HdTable {
    pub fn new(config: HdConfig) -> Result<Self> {
        config.validate()?;
        let basis = BasisSet::generate(BasisKind::Circular, config.n, config.dim, config.seed)?;
        Ok(Self::with_basis(config, Arc::new(basis)))
    }

    /// Shares an existing circular set between tables.
    pub fn with_basis(config: HdConfig, basis: Arc<BasisSet>) -> Self {
        assert_eq!(basis.len(), config.n, "basis cardinality must equal n");
        assert_eq!(basis.dim(), config.dim, "basis dimension must equal d");
        Self {
            config,
            basis,
            servers: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn config(&self) -> &HdConfig {
        &self.config
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    /// Index into the circular set for a key.
    pub fn encode_index(&self, key: &[u8]) -> usize {
        (hash64(key, self.config.seed) % self.config.n as u64) as usize
    }

    pub fn encode(&self, key: &[u8]) -> &Hypervector {
        self.basis.get(self.encode_index(key))
    }

    /// Stored server hypervectors in join order, paired with their ids.
    pub fn stored(&self) -> impl Iterator<Item = (&ServerId, &Hypervector)> {
        self.servers.iter().zip(&self.vectors)
    }
}

impl HashTable for HdTable {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Hd
    }

    fn join(&mut self, server: ServerId) -> Result<()> {
        ensure_absent(&self.servers, &server)?;
        if self.servers.len() + 1 >= self.config.n {
            return Err(Error::CapacityExceeded {
                servers: self.servers.len() + 1,
                capacity: self.config.n,
            });
        }
        let v = self.encode(server.as_bytes()).clone();
        self.servers.push(server);
        self.vectors.push(v);
        Ok(())
    }

    fn leave(&mut self, server: &ServerId) -> Result<()> {
        let i = position_of(&self.servers, server)?;
        self.servers.remove(i);
        self.vectors.remove(i);
        Ok(())
    }

    fn lookup(&self, request: &RequestId) -> Result<&ServerId> {
        let query = self.encode(request.as_bytes());
        pick_best(
            self.stored()
                .map(|(id, v)| (Reverse(v.hamming_unchecked(query)), id)),
        )
        .ok_or(Error::EmptyTable)
    }

    fn server_count(&self) -> usize {
        self.servers.len()
    }

    fn servers(&self) -> Vec<ServerId> {
        self.servers.clone()
    }

    fn corruption_surface(&mut self) -> CorruptionSurface<'_> {
        let dim = self.config.dim;
        let mut s = CorruptionSurface::new();
        for v in self.vectors.iter_mut() {
            s.push_words(v.words_mut(), dim);
        }
        s
    }

    fn surface_bytes(&self) -> Vec<u8> {
        self.vectors.iter().flat_map(|v| v.packed_bytes()).collect()
    }

    fn snapshot(&self) -> Box<dyn HashTable> {
        Box::new(self.clone())
    }
}
