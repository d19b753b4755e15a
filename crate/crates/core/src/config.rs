//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Lists are
//! comma-separated and may contain inclusive ranges (`0..10`).
//!
//! | key          | default            | meaning                                   |
//! |--------------|--------------------|-------------------------------------------|
//! | `strategies` | per experiment     | `modular`, `consistent`, `rendezvous`, `hd` |
//! | `servers`    | per experiment     | server pool sizes                         |
//! | `requests`   | 10000              | requests per cell                         |
//! | `d`          | 10000              | hypervector dimension                     |
//! | `n`          | 8192               | circular basis cardinality                |
//! | `noise`      | 0..10              | bit-error counts                          |
//! | `burst`      | 1                  | `1` = single-bit upsets, `mcu` = one burst per level |
//! | `seeds`      | 1..5               | replication seeds                         |
//! | `batch_size` | 256                | lookup batch boundary                     |

use std::path::Path;

use crate::error::{Error, Result};
use crate::faults::NoiseSpec;
use crate::strategy::{StrategyKind, TableParams};

/// How a noise level of `L` bits is delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurstMode {
    /// `L` independent single-bit upsets.
    Single,
    /// One contiguous `L`-bit multi-cell upset.
    Mcu,
}

impl BurstMode {
    pub fn noise_spec(self, bits: usize, seed: u64) -> NoiseSpec {
        match self {
            BurstMode::Single => NoiseSpec::single_bits(bits, seed),
            BurstMode::Mcu => NoiseSpec::burst(bits, seed),
        }
    }

    /// Burst length recorded in reports for a level of `bits`.
    pub fn burst_length(self, bits: usize) -> usize {
        match self {
            BurstMode::Single => 1,
            BurstMode::Mcu => bits.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `None` means the experiment's own default set.
    pub strategies: Option<Vec<StrategyKind>>,
    pub servers: Option<Vec<usize>>,
    pub requests: usize,
    pub dim: usize,
    pub n: usize,
    pub noise: Vec<usize>,
    pub burst: BurstMode,
    pub seeds: Vec<u64>,
    pub batch_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            strategies: None,
            servers: None,
            requests: 10_000,
            dim: crate::hypervector::DEFAULT_DIM,
            n: crate::strategy::HdConfig::default().n,
            noise: (0..=10).collect(),
            burst: BurstMode::Single,
            seeds: (1..=5).collect(),
            batch_size: 256,
        }
    }
}

impl ExperimentConfig {
    pub fn table_params(&self, seed: u64) -> TableParams {
        TableParams {
            seed,
            dim: self.dim,
            n: self.n,
        }
    }

    pub fn strategies_or(&self, default: &[StrategyKind]) -> Vec<StrategyKind> {
        self.strategies.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn servers_or(&self, default: &[usize]) -> Vec<usize> {
        self.servers.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        if self.requests == 0 {
            return bad("requests must be positive".into());
        }
        if self.dim == 0 {
            return bad("d must be positive".into());
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if let Some(s) = &self.servers {
            if s.is_empty() || s.contains(&0) {
                return bad("servers must be a non-empty list of positive counts".into());
            }
        }
        if let Some(s) = &self.strategies {
            if s.is_empty() {
                return bad("strategies must not be empty".into());
            }
        }
        if self.noise.is_empty() {
            return bad("noise must not be empty".into());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| Error::Config { line: line_no, msg };
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("empty value for {key}")));
            }
            match key {
                "strategies" => {
                    cfg.strategies = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().parse().map_err(|e: Error| err(e.to_string())))
                            .collect::<Result<_>>()?,
                    )
                }
                "servers" => cfg.servers = Some(parse_list(value).map_err(err)?),
                "requests" => cfg.requests = parse_positive(value).map_err(err)?,
                "d" => cfg.dim = parse_positive(value).map_err(err)?,
                "n" => {
                    cfg.n = parse_positive(value).map_err(err)?;
                    if cfg.n < 2 {
                        return Err(err("n must be at least 2".into()));
                    }
                }
                "noise" => cfg.noise = parse_list(value).map_err(err)?,
                "burst" => {
                    cfg.burst = match value {
                        "1" | "single" => BurstMode::Single,
                        "mcu" => BurstMode::Mcu,
                        other => {
                            return Err(err(format!("burst must be `1` or `mcu`, got {other:?}")))
                        }
                    }
                }
                "seeds" => cfg.seeds = parse_list(value).map_err(err)?,
                "batch_size" => cfg.batch_size = parse_positive(value).map_err(err)?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> std::io::Result<Result<Self>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }
}

fn parse_positive(value: &str) -> std::result::Result<usize, String> {
    let v: usize = value
        .parse()
        .map_err(|_| format!("{value:?} is not a non-negative integer"))?;
    if v == 0 {
        return Err("value must be positive".into());
    }
    Ok(v)
}

/// Comma-separated integers and inclusive `a..b` ranges, in order.
fn parse_list<T>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T: std::str::FromStr + Copy + TryFrom<u64>,
{
    let num = |s: &str| -> std::result::Result<u64, String> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("{s:?} is not a non-negative integer"))
    };
    let conv = |v: u64| T::try_from(v).map_err(|_| format!("{v} out of range"));
    let mut out = Vec::new();
    for item in value.split(',') {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range {a}..{b}"));
                }
                for v in a..=b {
                    out.push(conv(v)?);
                }
            }
            None => out.push(conv(num(item)?)?),
        }
    }
    Ok(out)
}
