//! Memory-error injection into a table's stored server state.
//!
//! A [`CorruptionSurface`] is a mutable, bit-addressable view over the
//! per-server state a strategy keeps in memory. Surface bit `i` maps to byte
//! `i / 8`, bit `i % 8` of the surface's little-endian serialization, so a
//! contiguous burst in the surface is a contiguous burst in memory.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypervector::{rng_from_seed, Rng};
use crate::strategy::HashTable;

enum Segment<'a> {
    /// Packed words holding `bits` live bits (hypervector storage or u64 entries).
    Words { words: &'a mut [u64], bits: usize },
    Bytes(&'a mut [u8]),
}

impl Segment<'_> {
    fn bits(&self) -> usize {
        match self {
            Segment::Words { bits, .. } => *bits,
            Segment::Bytes(b) => b.len() * 8,
        }
    }

    fn toggle(&mut self, i: usize) {
        match self {
            Segment::Words { words, .. } => words[i / 64] ^= 1 << (i % 64),
            Segment::Bytes(b) => b[i / 8] ^= 1 << (i % 8),
        }
    }

    fn get(&self, i: usize) -> bool {
        match self {
            Segment::Words { words, .. } => words[i / 64] >> (i % 64) & 1 == 1,
            Segment::Bytes(b) => b[i / 8] >> (i % 8) & 1 == 1,
        }
    }

    fn write_bytes(&self, out: &mut Vec<u8>) {
        match self {
            Segment::Words { words, bits } => out.extend(
                words
                    .iter()
                    .flat_map(|w| w.to_le_bytes())
                    .take(bits.div_ceil(8)),
            ),
            Segment::Bytes(b) => out.extend_from_slice(b),
        }
    }
}

/// Mutable view over a strategy's stored per-server state.
pub struct CorruptionSurface<'a> {
    segments: Vec<Segment<'a>>,
    // starts[i] is the first surface bit of segments[i]
    starts: Vec<usize>,
    total_bits: usize,
}

impl<'a> CorruptionSurface<'a> {
    pub fn new() -> Self {
        Self {
            segments: Vec::new(),
            starts: Vec::new(),
            total_bits: 0,
        }
    }

    fn push(&mut self, seg: Segment<'a>) {
        self.starts.push(self.total_bits);
        self.total_bits += seg.bits();
        self.segments.push(seg);
    }

    /// Appends `bits` live bits stored in `words`; padding is never touched.
    pub fn push_words(&mut self, words: &'a mut [u64], bits: usize) {
        assert!(bits <= words.len() * 64);
        self.push(Segment::Words { words, bits });
    }

    /// Appends whole 64-bit entries.
    pub fn push_u64s(&mut self, words: &'a mut [u64]) {
        let bits = words.len() * 64;
        self.push(Segment::Words { words, bits });
    }

    pub fn push_bytes(&mut self, bytes: &'a mut [u8]) {
        self.push(Segment::Bytes(bytes));
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    fn locate(&self, bit: usize) -> (usize, usize) {
        assert!(bit < self.total_bits, "bit {bit} out of range");
        let seg = self.starts.partition_point(|&s| s <= bit) - 1;
        // zero-length segments share a start with their successor
        let seg = (seg..self.segments.len())
            .find(|&s| bit - self.starts[s] < self.segments[s].bits())
            .expect("bit maps to a segment");
        (seg, bit - self.starts[seg])
    }

    pub fn toggle(&mut self, bit: usize) {
        let (seg, off) = self.locate(bit);
        self.segments[seg].toggle(off);
    }

    pub fn get(&self, bit: usize) -> bool {
        let (seg, off) = self.locate(bit);
        self.segments[seg].get(off)
    }

    /// Concatenated little-endian serialization of every segment.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_bits.div_ceil(8));
        for s in &self.segments {
            s.write_bytes(&mut out);
        }
        out
    }
}

impl Default for CorruptionSurface<'_> {
    fn default() -> Self {
        Self::new()
    }
}

/// How many bits to flip and whether they arrive as one contiguous burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub total_flips: usize,
    pub burst_length: usize,
    pub seed: u64,
}

impl NoiseSpec {
    /// `count` independent single-bit upsets.
    pub fn single_bits(count: usize, seed: u64) -> Self {
        Self {
            total_flips: count,
            burst_length: 1,
            seed,
        }
    }

    /// One multi-cell upset of `length` contiguous bits.
    pub fn burst(length: usize, seed: u64) -> Self {
        Self {
            total_flips: length,
            burst_length: length.max(1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burst_length == 0 {
            return Err(Error::InvalidNoise("burst length must be at least 1".into()));
        }
        if self.burst_length > 1 && self.total_flips != self.burst_length {
            return Err(Error::InvalidNoise(format!(
                "a burst is one event: total_flips {} != burst_length {}",
                self.total_flips, self.burst_length
            )));
        }
        Ok(())
    }
}

/// Flips bits of `surface` according to `spec`, returning the flipped positions.
pub fn inject(surface: &mut CorruptionSurface<'_>, spec: &NoiseSpec, rng: &mut Rng) -> Result<Vec<usize>> {
    spec.validate()?;
    let total = surface.total_bits();
    if spec.total_flips > total {
        return Err(Error::SurfaceTooSmall {
            flips: spec.total_flips,
            total_bits: total,
        });
    }
    if spec.total_flips == 0 {
        return Ok(Vec::new());
    }
    let positions: Vec<usize> = if spec.burst_length == 1 {
        let mut p = index::sample(rng, total, spec.total_flips).into_vec();
        p.sort_unstable();
        p
    } else {
        let start = rng.gen_range(0..=total - spec.burst_length);
        (start..start + spec.burst_length).collect()
    };
    for &p in &positions {
        surface.toggle(p);
    }
    Ok(positions)
}

/// Flip positions for a whole sweep of noise levels, drawn once.
///
/// Level `L` flips `positions[..L]`, so each level's errors include the
/// previous level's. Independent upsets come from one fully shuffled sample
/// of distinct positions; a burst is the contiguous run `p..p + max_flips`,
/// whose prefixes are shorter bursts at the same start.
pub fn sweep_positions(total_bits: usize, max_flips: usize, burst: bool, rng: &mut Rng) -> Result<Vec<usize>> {
    if max_flips > total_bits {
        return Err(Error::SurfaceTooSmall {
            flips: max_flips,
            total_bits,
        });
    }
    if max_flips == 0 {
        return Ok(Vec::new());
    }
    Ok(if burst {
        let start = rng.gen_range(0..=total_bits - max_flips);
        (start..start + max_flips).collect()
    } else {
        index::sample(rng, total_bits, max_flips).into_vec()
    })
}

/// Toggles every listed bit once.
pub fn apply(surface: &mut CorruptionSurface<'_>, positions: &[usize]) {
    for &p in positions {
        surface.toggle(p);
    }
}

/// Injects noise into a table's surface using a generator seeded from `spec.seed`.
pub fn inject_table(table: &mut dyn HashTable, spec: &NoiseSpec) -> Result<Vec<usize>> {
    let mut rng = rng_from_seed(spec.seed);
    inject(&mut table.corruption_surface(), spec, &mut rng)
}

/// Deep copy of a table's clean state.
pub fn snapshot(table: &dyn HashTable) -> Box<dyn HashTable> {
    table.snapshot()
}

/// Popcount of the XOR of two equally sized serializations.
pub fn xor_popcount(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len(), "serializations differ in length");
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_maps_bits_across_segments() {
        let mut words = [0u64; 2];
        let mut bytes = [0u8; 3];
        let mut empty: [u8; 0] = [];
        let mut s = CorruptionSurface::new();
        s.push_words(&mut words, 100);
        s.push_bytes(&mut empty);
        s.push_bytes(&mut bytes);
        assert_eq!(s.total_bits(), 124);
        s.toggle(0);
        s.toggle(99);
        s.toggle(100);
        s.toggle(123);
        assert!(s.get(99) && s.get(100) && !s.get(101));
        let ser = s.to_bytes();
        assert_eq!(ser.len(), 13 + 3);
        drop(s);
        assert_eq!(words, [1, 1 << 35]);
        assert_eq!(bytes, [1, 0, 0x80]);
        assert_eq!(ser[12], 0b1000);
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::single_bits(0, 1).validate().is_ok());
        assert!(NoiseSpec::burst(10, 1).validate().is_ok());
        let bad = NoiseSpec {
            total_flips: 4,
            burst_length: 2,
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let zero = NoiseSpec {
            total_flips: 0,
            burst_length: 0,
            seed: 0,
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn injection_respects_surface_size() {
        let mut bytes = [0u8; 2];
        let mut s = CorruptionSurface::new();
        s.push_bytes(&mut bytes);
        let mut rng = rng_from_seed(0);
        assert!(inject(&mut s, &NoiseSpec::single_bits(17, 0), &mut rng).is_err());
        assert!(inject(&mut s, &NoiseSpec::burst(17, 0), &mut rng).is_err());
        let flipped = inject(&mut s, &NoiseSpec::burst(16, 0), &mut rng).unwrap();
        assert_eq!(flipped, (0..16).collect::<Vec<_>>());
        drop(s);
        assert_eq!(bytes, [0xff, 0xff]);
    }

    #[test]
    fn burst_is_contiguous_and_single_bits_are_distinct() {
        for seed in 0..50 {
            let mut words = [0u64; 20];
            let mut s = CorruptionSurface::new();
            s.push_u64s(&mut words);
            let mut rng = rng_from_seed(seed);
            let p = inject(&mut s, &NoiseSpec::burst(10, seed), &mut rng).unwrap();
            assert!(p.windows(2).all(|w| w[1] == w[0] + 1));
            let before = s.to_bytes();
            let q = inject(&mut s, &NoiseSpec::single_bits(25, seed), &mut rng).unwrap();
            assert_eq!(xor_popcount(&before, &s.to_bytes()), 25);
            assert_eq!(q.len(), 25);
        }
    }

    #[test]
    fn sweep_prefixes_nest() {
        let mut rng = rng_from_seed(4);
        let p = sweep_positions(1000, 10, false, &mut rng).unwrap();
        assert_eq!(p.len(), 10);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        let b = sweep_positions(1000, 10, true, &mut rng).unwrap();
        assert!(b.windows(2).all(|w| w[1] == w[0] + 1));
        assert!(b[9] < 1000);
        assert!(sweep_positions(5, 6, false, &mut rng).is_err());
        assert!(sweep_positions(5, 0, true, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn sweep_sample_is_shuffled() {
        // a sorted prefix would bias low levels toward low positions
        let mut low = 0;
        for seed in 0..200 {
            let p = sweep_positions(1000, 10, false, &mut rng_from_seed(seed)).unwrap();
            if p[0] < 500 {
                low += 1;
            }
        }
        assert!((70..130).contains(&low), "{low}");
    }
}
