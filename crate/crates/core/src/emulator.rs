//! Request generator, hash-table harness, and the experiment drivers.
//!
//! Every report value except `latency_ns` is a pure function of the config
//! and its seeds. Independent (strategy, servers, seed) cells run in
//! parallel; records come back in a fixed order.

use std::collections::{BTreeSet, VecDeque};
use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;

use crate::config::{BurstMode, ExperimentConfig};
use crate::error::{Error, Result};
use crate::faults::{apply, sweep_positions, xor_popcount};
use crate::hash::hash64;
use crate::hypervector::rng_from_seed;
use crate::metrics::{chi_squared, mismatch_rate, remap_fraction, AssignmentMap};
use crate::strategy::{build_table, HashTable, RequestId, ServerId, StrategyKind};

pub const CSV_HEADER: &str = "strategy,servers,noise_bits,burst,seed,metric,value";

/// Server pool sizes for the timing sweep: 2, 4, ..., 2048.
pub fn timing_server_counts() -> Vec<usize> {
    (1..=11).map(|p| 1usize << p).collect()
}

pub const ROBUSTNESS_SERVERS: [usize; 4] = [64, 128, 256, 512];
pub const REMAP_SERVERS: [usize; 3] = [8, 64, 256];
pub const NOISY_STRATEGIES: [StrategyKind; 3] =
    [StrategyKind::Consistent, StrategyKind::Rendezvous, StrategyKind::Hd];

/// `server-1` .. `server-k`.
pub fn server_ids(k: usize) -> Vec<ServerId> {
    (1..=k).map(server_id).collect()
}

pub fn server_id(i: usize) -> ServerId {
    ServerId::new(format!("server-{i}")).expect("non-empty")
}

/// Request keys: the decimal form of `hash64(decimal(i), seed)` for `i = 0..count`.
pub fn request_keys(seed: u64, count: usize) -> Vec<RequestId> {
    (0..count)
        .map(|i| {
            let h = hash64(i.to_string().as_bytes(), seed);
            RequestId::new(h.to_string()).expect("non-empty")
        })
        .collect()
}

/// One message from the generator to the hash table module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Join(ServerId),
    Leave(ServerId),
    Request(RequestId),
}

/// A replayable schedule of control and data requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestStream {
    pub seed: u64,
    pub events: Vec<Event>,
}

impl RequestStream {
    /// `k` joins followed by `count` requests.
    pub fn join_then_requests(k: usize, count: usize, seed: u64) -> Self {
        let events = server_ids(k)
            .into_iter()
            .map(Event::Join)
            .chain(request_keys(seed, count).into_iter().map(Event::Request))
            .collect();
        Self { seed, events }
    }

    /// Checks that every leave targets a present server and joins are unique.
    pub fn validate(&self) -> Result<()> {
        let mut present = BTreeSet::new();
        for e in &self.events {
            match e {
                Event::Join(s) => {
                    if !present.insert(s) {
                        return Err(Error::DuplicateServer(s.to_string()));
                    }
                }
                Event::Leave(s) => {
                    if !present.remove(s) {
                        return Err(Error::UnknownServer(s.to_string()));
                    }
                }
                Event::Request(_) => {}
            }
        }
        Ok(())
    }
}

/// The hash table module: drains a buffer of events against one table.
pub struct Emulator {
    table: Box<dyn HashTable>,
    buffer: VecDeque<Event>,
    batch_size: usize,
}

impl Emulator {
    pub fn new(table: Box<dyn HashTable>, batch_size: usize) -> Self {
        assert!(batch_size > 0);
        Self {
            table,
            buffer: VecDeque::new(),
            batch_size,
        }
    }

    pub fn table(&self) -> &dyn HashTable {
        self.table.as_ref()
    }

    pub fn table_mut(&mut self) -> &mut dyn HashTable {
        self.table.as_mut()
    }

    pub fn into_table(self) -> Box<dyn HashTable> {
        self.table
    }

    pub fn submit(&mut self, event: Event) {
        self.buffer.push_back(event);
    }

    pub fn submit_all(&mut self, events: impl IntoIterator<Item = Event>) {
        self.buffer.extend(events);
    }

    /// Processes everything buffered. Data requests are looked up in batches
    /// of `batch_size`; a control request flushes the pending batch first.
    pub fn run(&mut self) -> Result<AssignmentMap> {
        let mut requests = Vec::new();
        let mut servers = Vec::new();
        let mut pending: Vec<RequestId> = Vec::with_capacity(self.batch_size);
        while let Some(event) = self.buffer.pop_front() {
            match event {
                Event::Request(r) => {
                    pending.push(r);
                    if pending.len() == self.batch_size {
                        self.flush(&mut pending, &mut requests, &mut servers)?;
                    }
                }
                Event::Join(s) => {
                    self.flush(&mut pending, &mut requests, &mut servers)?;
                    self.table.join(s)?;
                }
                Event::Leave(s) => {
                    self.flush(&mut pending, &mut requests, &mut servers)?;
                    self.table.leave(&s)?;
                }
            }
        }
        self.flush(&mut pending, &mut requests, &mut servers)?;
        Ok(AssignmentMap::new(requests, servers))
    }

    fn flush(
        &self,
        pending: &mut Vec<RequestId>,
        requests: &mut Vec<RequestId>,
        servers: &mut Vec<ServerId>,
    ) -> Result<()> {
        if pending.is_empty() {
            return Ok(());
        }
        servers.extend(self.table.batch_lookup(pending)?);
        requests.append(pending);
        Ok(())
    }
}

/// Assigns every request against the table's current state.
pub fn assign(table: &dyn HashTable, requests: &[RequestId], batch_size: usize) -> Result<AssignmentMap> {
    let mut servers = Vec::with_capacity(requests.len());
    for chunk in requests.chunks(batch_size) {
        servers.extend(table.batch_lookup(chunk)?);
    }
    Ok(AssignmentMap::new(requests.to_vec(), servers))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    LatencyNs,
    MismatchRate,
    ChiSquared,
    RemapLeave,
    RemapJoin,
    LeaveViolations,
    JoinViolations,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::LatencyNs => "latency_ns",
            Metric::MismatchRate => "mismatch_rate",
            Metric::ChiSquared => "chi_squared",
            Metric::RemapLeave => "remap_leave",
            Metric::RemapJoin => "remap_join",
            Metric::LeaveViolations => "leave_violations",
            Metric::JoinViolations => "join_violations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub strategy: StrategyKind,
    pub servers: usize,
    pub noise_bits: usize,
    pub burst: usize,
    pub seed: u64,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<Record>,
}

impl ExperimentReport {
    /// Per-seed values for one (strategy, servers, noise, metric) cell, in seed order.
    pub fn values(&self, strategy: StrategyKind, servers: usize, noise_bits: usize, metric: Metric) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| {
                r.strategy == strategy && r.servers == servers && r.noise_bits == noise_bits && r.metric == metric
            })
            .map(|r| r.value)
            .collect()
    }

    pub fn median(&self, strategy: StrategyKind, servers: usize, noise_bits: usize, metric: Metric) -> Option<f64> {
        median(&self.values(strategy, servers, noise_bits, metric))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER.split(','))?;
        for r in &self.records {
            w.write_record([
                r.strategy.name().to_string(),
                r.servers.to_string(),
                r.noise_bits.to_string(),
                r.burst.to_string(),
                r.seed.to_string(),
                r.metric.name().to_string(),
                r.value.to_string(),
            ])?;
        }
        w.flush()
    }

    /// One line per (strategy, servers) cell: each metric's median over
    /// seeds, listed by noise level when there is more than one.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut cells: Vec<(StrategyKind, usize)> = Vec::new();
        for r in &self.records {
            if !cells.contains(&(r.strategy, r.servers)) {
                cells.push((r.strategy, r.servers));
            }
        }
        cells
            .into_iter()
            .map(|(s, k)| {
                let mut metrics: Vec<Metric> = Vec::new();
                let mut levels: Vec<usize> = Vec::new();
                for r in self.records.iter().filter(|r| r.strategy == s && r.servers == k) {
                    if !metrics.contains(&r.metric) {
                        metrics.push(r.metric);
                    }
                    if !levels.contains(&r.noise_bits) {
                        levels.push(r.noise_bits);
                    }
                }
                let parts: Vec<String> = metrics
                    .into_iter()
                    .map(|m| {
                        let meds: Vec<String> = levels
                            .iter()
                            .filter_map(|&l| self.median(s, k, l, m))
                            .map(|v| if v.fract() == 0.0 { format!("{v}") } else { format!("{v:.6}") })
                            .collect();
                        format!("{}={}", m.name(), meds.join(","))
                    })
                    .collect();
                format!("{s:<10} servers={k:<5} {}", parts.join(" "))
            })
            .collect()
    }
}

/// Median of a sample; mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn noise_seed(seed: u64) -> u64 {
    hash64(&seed.to_le_bytes(), 0x6e6f697365)
}

/// One corrupted copy of `clean` per configured noise level. Levels share a
/// single draw of flip positions, so a higher level contains every flip of
/// a lower one.
fn noisy_copies(clean: &dyn HashTable, config: &ExperimentConfig, seed: u64) -> Result<Vec<(usize, Box<dyn HashTable>)>> {
    let max = config.noise.iter().copied().max().unwrap_or(0);
    let total_bits = clean.snapshot().corruption_surface().total_bits();
    let burst = config.burst == BurstMode::Mcu;
    let positions = sweep_positions(total_bits, max, burst, &mut rng_from_seed(noise_seed(seed)))?;
    Ok(config
        .noise
        .iter()
        .map(|&bits| {
            let mut t = clean.snapshot();
            apply(&mut t.corruption_surface(), &positions[..bits]);
            (bits, t)
        })
        .collect())
}

fn populated_table(strategy: StrategyKind, k: usize, config: &ExperimentConfig, seed: u64) -> Result<Box<dyn HashTable>> {
    let mut table = build_table(strategy, &config.table_params(seed))?;
    for s in server_ids(k) {
        table.join(s)?;
    }
    Ok(table)
}

fn cells(strategies: &[StrategyKind], servers: &[usize], seeds: &[u64]) -> Vec<(StrategyKind, usize, u64)> {
    let mut out = Vec::new();
    for &s in strategies {
        for &k in servers {
            for &seed in seeds {
                out.push((s, k, seed));
            }
        }
    }
    out
}

fn run_cells<F>(cells: Vec<(StrategyKind, usize, u64)>, f: F) -> Result<ExperimentReport>
where
    F: Fn(StrategyKind, usize, u64) -> Result<Vec<Record>> + Sync,
{
    let results: Vec<Result<Vec<Record>>> = cells
        .into_par_iter()
        .map(|(s, k, seed)| f(s, k, seed))
        .collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    Ok(ExperimentReport { records })
}

/// Mean lookup latency per (strategy, servers, seed).
///
/// Joins are excluded; one warm-up pass precedes the timed pass. Cells run
/// sequentially so measurements do not compete for cores.
pub fn run_timing(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let strategies = config.strategies_or(&StrategyKind::ALL);
    let servers = config.servers_or(&timing_server_counts());
    let mut records = Vec::new();
    for (strategy, k, seed) in cells(&strategies, &servers, &config.seeds) {
        let table = populated_table(strategy, k, config, seed)?;
        let keys = request_keys(seed, config.requests);
        let pass = |table: &dyn HashTable| -> Result<()> {
            for chunk in keys.chunks(config.batch_size) {
                for r in chunk {
                    black_box(table.lookup(black_box(r))?);
                }
            }
            Ok(())
        };
        pass(table.as_ref())?;
        let start = Instant::now();
        pass(table.as_ref())?;
        let elapsed = start.elapsed().as_nanos() as f64;
        records.push(Record {
            strategy,
            servers: k,
            noise_bits: 0,
            burst: 1,
            seed,
            metric: Metric::LatencyNs,
            value: (elapsed / config.requests as f64).max(f64::MIN_POSITIVE),
        });
    }
    Ok(ExperimentReport { records })
}

/// Mismatch rate against a clean snapshot for every noise level.
pub fn run_robustness(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let strategies = config.strategies_or(&NOISY_STRATEGIES);
    let servers = config.servers_or(&ROBUSTNESS_SERVERS);
    run_cells(cells(&strategies, &servers, &config.seeds), |strategy, k, seed| {
        let clean = populated_table(strategy, k, config, seed)?;
        let clean_bytes = clean.surface_bytes();
        let keys = request_keys(seed, config.requests);
        let clean_map = assign(clean.as_ref(), &keys, config.batch_size)?;
        let mut out = Vec::new();
        for (bits, noisy) in noisy_copies(clean.as_ref(), config, seed)? {
            let flipped = xor_popcount(&clean_bytes, &noisy.surface_bytes());
            if flipped != bits {
                return Err(Error::Invariant(format!(
                    "{strategy} k={k}: injected {bits} flips but {flipped} bits differ"
                )));
            }
            let rate = mismatch_rate(&clean_map, &assign(noisy.as_ref(), &keys, config.batch_size)?)?;
            if bits == 0 && rate != 0.0 {
                return Err(Error::Invariant(format!("{strategy} k={k}: mismatches without noise")));
            }
            out.push(Record {
                strategy,
                servers: k,
                noise_bits: bits,
                burst: config.burst.burst_length(bits),
                seed,
                metric: Metric::MismatchRate,
                value: rate,
            });
        }
        if clean.surface_bytes() != clean_bytes {
            return Err(Error::Invariant(format!("{strategy} k={k}: clean snapshot changed")));
        }
        Ok(out)
    })
}

/// Pearson chi-squared of per-server load against uniform, per noise level.
pub fn run_uniformity(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let strategies = config.strategies_or(&NOISY_STRATEGIES);
    let servers = config.servers_or(&ROBUSTNESS_SERVERS);
    run_cells(cells(&strategies, &servers, &config.seeds), |strategy, k, seed| {
        let clean = populated_table(strategy, k, config, seed)?;
        let keys = request_keys(seed, config.requests);
        let mut out = Vec::new();
        for (bits, table) in noisy_copies(clean.as_ref(), config, seed)? {
            let map = assign(table.as_ref(), &keys, config.batch_size)?;
            let population: Vec<ServerId> = table.servers().into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            let counts = map.counts_for(&population);
            let stat = chi_squared(&counts, keys.len() as u64, population.len())?;
            out.push(Record {
                strategy,
                servers: k,
                noise_bits: bits,
                burst: config.burst.burst_length(bits),
                seed,
                metric: Metric::ChiSquared,
                value: stat,
            });
        }
        Ok(out)
    })
}

/// Outcome of one leave and one join against the same starting table.
#[derive(Debug, Clone, PartialEq)]
pub struct RemapOutcome {
    pub departed: ServerId,
    pub joined: ServerId,
    pub leave_fraction: f64,
    pub join_fraction: f64,
    /// Requests that moved although they were not on the departed server.
    pub leave_violations: usize,
    /// Requests that moved somewhere other than the new server.
    pub join_violations: usize,
}

pub fn remap_cell(strategy: StrategyKind, k: usize, config: &ExperimentConfig, seed: u64) -> Result<RemapOutcome> {
    if k < 2 {
        return Err(Error::InvalidConfig("remap needs at least 2 servers".into()));
    }
    let table = populated_table(strategy, k, config, seed)?;
    let keys = request_keys(seed, config.requests);
    let before = assign(table.as_ref(), &keys, config.batch_size)?;

    let departed = server_id(rng_from_seed(seed).gen_range(1..=k));
    let mut shrunk = table.snapshot();
    shrunk.leave(&departed)?;
    let after_leave = assign(shrunk.as_ref(), &keys, config.batch_size)?;
    let leave_violations = before
        .servers()
        .iter()
        .zip(after_leave.servers())
        .filter(|(b, a)| b != a && **b != departed)
        .count();

    let joined = server_id(k + 1);
    let mut grown = table.snapshot();
    grown.join(joined.clone())?;
    let after_join = assign(grown.as_ref(), &keys, config.batch_size)?;
    let join_violations = before
        .servers()
        .iter()
        .zip(after_join.servers())
        .filter(|(b, a)| b != a && **a != joined)
        .count();

    Ok(RemapOutcome {
        leave_fraction: remap_fraction(&before, &after_leave)?,
        join_fraction: remap_fraction(&before, &after_join)?,
        departed,
        joined,
        leave_violations,
        join_violations,
    })
}

/// Fraction of requests remapped by one leave and by one join.
///
/// Any minimal-disruption violation by consistent, rendezvous, or HD
/// hashing is an invariant error.
pub fn run_remap(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let strategies = config.strategies_or(&StrategyKind::ALL);
    let servers = config.servers_or(&REMAP_SERVERS);
    run_cells(cells(&strategies, &servers, &config.seeds), |strategy, k, seed| {
        let o = remap_cell(strategy, k, config, seed)?;
        if strategy != StrategyKind::Modular && (o.leave_violations > 0 || o.join_violations > 0) {
            return Err(Error::Invariant(format!(
                "{strategy} k={k} seed={seed}: {} leave and {} join violations",
                o.leave_violations, o.join_violations
            )));
        }
        let rec = |metric, value| Record {
            strategy,
            servers: k,
            noise_bits: 0,
            burst: 1,
            seed,
            metric,
            value,
        };
        Ok(vec![
            rec(Metric::RemapLeave, o.leave_fraction),
            rec(Metric::RemapJoin, o.join_fraction),
            rec(Metric::LeaveViolations, o.leave_violations as f64),
            rec(Metric::JoinViolations, o.join_violations as f64),
        ])
    })
}
