//! Hyperdimensional hashing and the dynamic hash tables it is compared with.
//!
//! - [`hypervector`]: packed binary hypervectors and their operations.
//! - [`basis`]: random, level, and circular basis sets.
//! - [`strategy`]: modular, consistent, rendezvous, and HD hash tables.
//! - [`faults`]: bit-flip and burst injection into stored table state.
//! - [`metrics`]: mismatch rate, chi-squared uniformity, remap fraction.
//! - [`emulator`]: request generator and the timing, robustness,
//!   uniformity, and remap experiments.
//! - [`config`]: key-value experiment configuration files.
//! - [`cli`]: the `hdhash` command-line front end.

pub mod basis;
pub mod cli;
pub mod config;
pub mod emulator;
pub mod error;
pub mod faults;
pub mod hash;
pub mod hypervector;
pub mod metrics;
pub mod strategy;

pub use error::{Error, Result};
pub use hypervector::{rng_from_seed, Hypervector, Rng};
pub use strategy::{build_table, HashTable, RequestId, ServerId, StrategyKind, TableParams};
