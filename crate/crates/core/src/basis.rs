//! Basis-hypervector sets: random, level, and circular.
//!
//! Level and circular sets are built from transformation vectors that each
//! flip a fixed number of bits. All flipped positions for one set are drawn
//! without replacement from a single sample of the dimension, so distances
//! along the chain add up exactly instead of saturating.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::hypervector::{rng_from_seed, Hypervector, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Random,
    Level,
    Circular,
}

impl BasisKind {
    fn tag(self) -> u8 {
        match self {
            BasisKind::Random => 0,
            BasisKind::Level => 1,
            BasisKind::Circular => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(BasisKind::Random),
            1 => Ok(BasisKind::Level),
            2 => Ok(BasisKind::Circular),
            t => Err(Error::Decode(format!("unknown basis kind tag {t}"))),
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(BasisKind::Random),
            "level" => Ok(BasisKind::Level),
            "circular" => Ok(BasisKind::Circular),
            other => Err(Error::InvalidBasis(format!("unknown kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::Random => "random",
            BasisKind::Level => "level",
            BasisKind::Circular => "circular",
        })
    }
}

/// An ordered set of `n` hypervectors of dimension `d`.
///
/// Indices are zero-based in code; `get(0)` is the first vector of the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSet {
    kind: BasisKind,
    dim: usize,
    seed: u64,
    vectors: Vec<Hypervector>,
}

impl BasisSet {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Seed the set was generated from (recorded in the serialized header).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, i: usize) -> &Hypervector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Hypervector] {
        &self.vectors
    }

    /// Builds the set of the given kind from a seed.
    pub fn generate(kind: BasisKind, n: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut set = match kind {
            BasisKind::Random => generate_random_set(n, dim, &mut rng)?,
            BasisKind::Level => generate_level_set(n, dim, &mut rng)?,
            BasisKind::Circular if n.is_multiple_of(2) => generate_circular_set(n, dim, &mut rng)?,
            BasisKind::Circular => generate_circular_set_odd(n, dim, &mut rng)?,
        };
        set.seed = seed;
        Ok(set)
    }

    /// Header (`kind: u8`, `n: u32`, `d: u32`, `seed: u64`, all LE) followed by
    /// each vector's length-prefixed layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.kind.tag()];
        out.extend_from_slice(&(self.vectors.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for v in &self.vectors {
            out.extend(v.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const HEADER: usize = 1 + 4 + 4 + 8;
        if bytes.len() < HEADER {
            return Err(Error::Decode("truncated basis header".into()));
        }
        let kind = BasisKind::from_tag(bytes[0])?;
        let n = u32::from_le_bytes(bytes[1..5].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
        let mut rest = &bytes[HEADER..];
        let mut vectors = Vec::with_capacity(n);
        for _ in 0..n {
            let (v, tail) = Hypervector::from_bytes(rest)?;
            if v.dim() != dim {
                return Err(Error::Decode(format!(
                    "vector of dimension {} in a d={dim} set",
                    v.dim()
                )));
            }
            vectors.push(v);
            rest = tail;
        }
        if !rest.is_empty() {
            return Err(Error::Decode(format!("{} trailing bytes", rest.len())));
        }
        Ok(Self {
            kind,
            dim,
            seed,
            vectors,
        })
    }
}

fn check_dims(n: usize, dim: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidBasis("cardinality must be at least 1".into()));
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(())
}

/// `steps` transformation vectors flipping `per_step` bits each, with no
/// position reused across steps.
fn disjoint_transformations(
    steps: usize,
    per_step: usize,
    dim: usize,
    rng: &mut Rng,
) -> Result<Vec<Hypervector>> {
    let positions = index::sample(rng, dim, steps * per_step).into_vec();
    (0..steps)
        .map(|s| {
            let mut t = Hypervector::zeros(dim)?;
            for &p in &positions[s * per_step..(s + 1) * per_step] {
                t.toggle(p);
            }
            Ok(t)
        })
        .collect()
}

pub fn generate_random_set(n: usize, dim: usize, rng: &mut Rng) -> Result<BasisSet> {
    check_dims(n, dim)?;
    let vectors = (0..n)
        .map(|_| Hypervector::random(dim, rng))
        .collect::<Result<_>>()?;
    Ok(BasisSet {
        kind: BasisKind::Random,
        dim,
        seed: 0,
        vectors,
    })
}

/// Linearly correlated chain: `n - 1` steps of `floor(d / (2(n-1)))` fresh
/// bit flips each, so the last vector is quasi-orthogonal to the first.
pub fn generate_level_set(n: usize, dim: usize, rng: &mut Rng) -> Result<BasisSet> {
    check_dims(n, dim)?;
    if n < 2 {
        return Err(Error::InvalidBasis("level sets need n >= 2".into()));
    }
    if dim < n {
        return Err(Error::InvalidBasis(format!("d={dim} is smaller than n={n}")));
    }
    let steps = n - 1;
    let per_step = dim / (2 * steps);
    let first = Hypervector::random(dim, rng)?;
    let ts = disjoint_transformations(steps, per_step, dim, rng)?;
    let mut vectors = Vec::with_capacity(n);
    vectors.push(first);
    for t in &ts {
        let next = vectors.last().unwrap().bind(t)?;
        vectors.push(next);
    }
    Ok(BasisSet {
        kind: BasisKind::Level,
        dim,
        seed: 0,
        vectors,
    })
}

/// Circular set for even `n`.
///
/// `n/2` transformations of `floor(d/n)` bits walk from the first vector to
/// the opposite point; the first `n/2 - 1` of them are then replayed in
/// queue order to walk back. The last vector is one transformation
/// (`t_{n/2}`) away from the first, which closes the circle.
pub fn generate_circular_set(n: usize, dim: usize, rng: &mut Rng) -> Result<BasisSet> {
    check_dims(n, dim)?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidBasis(format!(
            "circular core routine needs an even n >= 2, got {n}"
        )));
    }
    if dim < n {
        return Err(Error::InvalidBasis(format!("d={dim} is smaller than n={n}")));
    }
    let half = n / 2;
    let per_step = dim / n;
    let first = Hypervector::random(dim, rng)?;
    let queue = disjoint_transformations(half, per_step, dim, rng)?;

    let mut vectors = Vec::with_capacity(n);
    vectors.push(first);
    for t in &queue {
        let next = vectors.last().unwrap().bind(t)?;
        vectors.push(next);
    }
    for t in &queue[..half - 1] {
        let next = vectors.last().unwrap().bind(t)?;
        vectors.push(next);
    }
    debug_assert_eq!(vectors.len(), n);
    Ok(BasisSet {
        kind: BasisKind::Circular,
        dim,
        seed: 0,
        vectors,
    })
}

/// Odd `n`: build a `2n` circle and keep every other vector, starting with the first.
pub fn generate_circular_set_odd(n: usize, dim: usize, rng: &mut Rng) -> Result<BasisSet> {
    check_dims(n, dim)?;
    if n.is_multiple_of(2) {
        return Err(Error::InvalidBasis(format!(
            "n={n} is even; use the even circular routine"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidBasis("odd circular sets need n >= 3".into()));
    }
    if dim < 2 * n {
        return Err(Error::InvalidBasis(format!(
            "d={dim} is smaller than 2n={}",
            2 * n
        )));
    }
    let parent = generate_circular_set(2 * n, dim, rng)?;
    let vectors = parent.vectors.into_iter().step_by(2).collect();
    Ok(BasisSet {
        kind: BasisKind::Circular,
        dim,
        seed: 0,
        vectors,
    })
}

/// Pairwise similarity matrix of a basis set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// `(i, j, value)` triples in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / self.n, k % self.n, v))
    }
}

pub fn similarity_profile(set: &BasisSet) -> SimilarityProfile {
    let n = set.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let h = set.vectors[i].hamming_unchecked(&set.vectors[j]);
            let s = 1.0 - 2.0 * h as f64 / set.dim as f64;
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityProfile { n, values }
}

/// Circular index distance `min(|i - j|, n - |i - j|)`.
pub fn circular_distance(i: usize, j: usize, n: usize) -> usize {
    let diff = i.abs_diff(j) % n;
    diff.min(n - diff)
}
