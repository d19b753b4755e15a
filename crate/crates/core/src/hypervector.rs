//! Packed binary hypervectors.
//!
//! Bits are stored little-endian in `u64` words: bit `i` lives in word `i / 64`
//! at position `i % 64`. Padding bits past the dimension are always zero, so
//! popcounts over whole words are exact.

use rand::seq::index;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Deterministic generator used everywhere randomness is needed.
pub type Rng = ChaCha8Rng;

/// Dimension used by default for every hypervector in the crate.
pub const DEFAULT_DIM: usize = 10_000;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    words: Vec<u64>,
    dim: usize,
}

impl std::fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hypervector(d={}, ones={})", self.dim, self.count_ones())
    }
}

fn words_for(dim: usize) -> usize {
    dim.div_ceil(64)
}

fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl Hypervector {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            words: vec![0; words_for(dim)],
            dim,
        })
    }

    /// Each bit is an independent fair coin drawn from `rng`.
    pub fn random(dim: usize, rng: &mut Rng) -> Result<Self> {
        let mut hv = Self::zeros(dim)?;
        for w in hv.words.iter_mut() {
            *w = rng.gen();
        }
        hv.clear_padding();
        Ok(hv)
    }

    /// Builds a vector from an explicit bit list; handy in tests.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut hv = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                hv.toggle(i);
            }
        }
        Ok(hv)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mutable access to the packed words. Callers must keep padding bits zero.
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.dim, "bit {i} out of range for d={}", self.dim);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.dim, "bit {i} out of range for d={}", self.dim);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn clear_padding(&mut self) {
        let mask = tail_mask(self.dim);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// Binding: bitwise XOR.
    pub fn bind(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Self {
            words,
            dim: self.dim,
        })
    }

    pub fn bind_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn hamming(&self, other: &Self) -> Result<usize> {
        self.check_dim(other)?;
        Ok(self.hamming_unchecked(other))
    }

    #[inline]
    pub(crate) fn hamming_unchecked(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `1 - 2 * hamming / d`, the cosine similarity of the bipolar forms.
    pub fn similarity(&self, other: &Self) -> Result<f64> {
        let h = self.hamming(other)?;
        Ok(1.0 - 2.0 * h as f64 / self.dim as f64)
    }

    /// Inverts exactly `count` distinct positions chosen uniformly at random.
    pub fn flip_random_bits(&self, count: usize, rng: &mut Rng) -> Result<Self> {
        if count > self.dim {
            return Err(Error::TooManyFlips {
                count,
                dim: self.dim,
            });
        }
        let mut out = self.clone();
        for i in index::sample(rng, self.dim, count) {
            out.toggle(i);
        }
        Ok(out)
    }

    /// Packed bits only: `ceil(d/8)` little-endian bytes.
    pub fn packed_bytes(&self) -> Vec<u8> {
        let n = self.dim.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n)
            .collect()
    }

    /// Length-prefixed layout: `d` as `u32` LE followed by the packed bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = u32::try_from(self.dim).expect("dimension exceeds u32");
        let mut out = Vec::with_capacity(4 + self.dim.div_ceil(8));
        out.extend_from_slice(&dim.to_le_bytes());
        out.extend(self.packed_bytes());
        out
    }

    /// Parses one layout from the front of `bytes`, returning it and the rest.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, &[u8])> {
        let (head, rest) = bytes
            .split_first_chunk::<4>()
            .ok_or_else(|| Error::Decode("missing dimension prefix".into()))?;
        let dim = u32::from_le_bytes(*head) as usize;
        let n = dim.div_ceil(8);
        if rest.len() < n {
            return Err(Error::Decode(format!(
                "need {n} payload bytes, have {}",
                rest.len()
            )));
        }
        let mut hv = Self::zeros(dim)?;
        for (i, chunk) in rest[..n].chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            hv.words[i] = u64::from_le_bytes(buf);
        }
        if hv.words.last().copied().unwrap_or(0) & !tail_mask(dim) != 0 {
            return Err(Error::Decode("nonzero padding bits".into()));
        }
        Ok((hv, &rest[n..]))
    }
}

pub fn random_hypervector(dim: usize, rng: &mut Rng) -> Result<Hypervector> {
    Hypervector::random(dim, rng)
}

pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    a.bind(b)
}

pub fn hamming(a: &Hypervector, b: &Hypervector) -> Result<usize> {
    a.hamming(b)
}

pub fn similarity(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    a.similarity(b)
}

pub fn flip_random_bits(v: &Hypervector, count: usize, rng: &mut Rng) -> Result<Hypervector> {
    v.flip_random_bits(count, rng)
}
