//! Mismatch rate, Pearson chi-squared uniformity, and remap fraction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::strategy::{RequestId, ServerId};

/// Requests in generation order, each paired with the server it was routed to.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssignmentMap {
    requests: Vec<RequestId>,
    servers: Vec<ServerId>,
}

impl AssignmentMap {
    pub fn new(requests: Vec<RequestId>, servers: Vec<ServerId>) -> Self {
        assert_eq!(requests.len(), servers.len());
        Self { requests, servers }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn requests(&self) -> &[RequestId] {
        &self.requests
    }

    pub fn servers(&self) -> &[ServerId] {
        &self.servers
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RequestId, &ServerId)> {
        self.requests.iter().zip(&self.servers)
    }

    /// Request count per server, for the servers that appear.
    pub fn counts(&self) -> BTreeMap<&ServerId, u64> {
        let mut out = BTreeMap::new();
        for s in &self.servers {
            *out.entry(s).or_insert(0) += 1;
        }
        out
    }

    /// Per-server counts for an explicit population (absent servers count 0).
    pub fn counts_for(&self, population: &[ServerId]) -> Vec<u64> {
        let counts = self.counts();
        population
            .iter()
            .map(|s| counts.get(s).copied().unwrap_or(0))
            .collect()
    }
}

fn differing(a: &AssignmentMap, b: &AssignmentMap) -> Result<usize> {
    if a.requests != b.requests {
        return Err(Error::SequenceMismatch);
    }
    Ok(a.servers
        .iter()
        .zip(&b.servers)
        .filter(|(x, y)| x != y)
        .count())
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Fraction of requests routed differently from the clean assignment.
pub fn mismatch_rate(clean: &AssignmentMap, corrupted: &AssignmentMap) -> Result<f64> {
    Ok(fraction(differing(clean, corrupted)?, clean.len()))
}

/// Fraction of requests whose server changed between two table states.
pub fn remap_fraction(before: &AssignmentMap, after: &AssignmentMap) -> Result<f64> {
    Ok(fraction(differing(before, after)?, before.len()))
}

/// Pearson statistic `sum((R(s) - E)^2 / E)` with `E = total_requests / total_servers`.
pub fn chi_squared(counts: &[u64], total_requests: u64, total_servers: usize) -> Result<f64> {
    if total_requests == 0 || total_servers == 0 {
        return Err(Error::NoRequests);
    }
    if counts.len() != total_servers {
        return Err(Error::CountMismatch {
            counts: counts.len(),
            servers: total_servers,
        });
    }
    let sum: u64 = counts.iter().sum();
    if sum != total_requests {
        return Err(Error::Invariant(format!(
            "counts sum to {sum}, expected {total_requests}"
        )));
    }
    let expected = total_requests as f64 / total_servers as f64;
    Ok(counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rid(i: usize) -> RequestId {
        RequestId::new(format!("r{i}")).unwrap()
    }

    fn sid(i: u64) -> ServerId {
        ServerId::new(format!("s{i}")).unwrap()
    }

    fn map(servers: &[u64]) -> AssignmentMap {
        AssignmentMap::new(
            (0..servers.len()).map(rid).collect(),
            servers.iter().map(|&s| sid(s)).collect(),
        )
    }

    #[test]
    fn mismatch_examples() {
        let a = map(&[1, 2, 3]);
        assert_eq!(mismatch_rate(&a, &a).unwrap(), 0.0);
        assert_eq!(mismatch_rate(&a, &map(&[2, 3, 1])).unwrap(), 1.0);
        let mut servers = vec![0u64; 10_000];
        let clean = map(&servers);
        servers[1] = 1;
        servers[500] = 1;
        servers[9999] = 1;
        assert_eq!(mismatch_rate(&clean, &map(&servers)).unwrap(), 0.0003);
    }

    #[test]
    fn sequence_mismatch_is_an_error() {
        let a = map(&[1, 2]);
        let b = AssignmentMap::new(vec![rid(5), rid(6)], vec![sid(1), sid(2)]);
        assert_eq!(mismatch_rate(&a, &b), Err(Error::SequenceMismatch));
        assert_eq!(remap_fraction(&a, &map(&[1])), Err(Error::SequenceMismatch));
    }

    #[test]
    fn chi_squared_examples() {
        assert_eq!(chi_squared(&[5, 5, 5, 5], 20, 4).unwrap(), 0.0);
        assert!((chi_squared(&[6, 4, 5, 5], 20, 4).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(chi_squared(&[10, 0], 10, 2).unwrap(), 10.0);
    }

    #[test]
    fn chi_squared_uses_exact_expectation() {
        // E = 10/3, not 3
        let got = chi_squared(&[4, 3, 3], 10, 3).unwrap();
        let e = 10.0 / 3.0;
        let want = ((4.0 - e) * (4.0 - e) + 2.0 * (3.0 - e) * (3.0 - e)) / e;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn chi_squared_errors() {
        assert_eq!(chi_squared(&[], 0, 0), Err(Error::NoRequests));
        assert_eq!(chi_squared(&[0, 0], 0, 2), Err(Error::NoRequests));
        assert!(chi_squared(&[1, 2], 3, 3).is_err());
        assert!(chi_squared(&[1, 2], 4, 2).is_err());
    }

    #[test]
    fn remap_unrelated_change_is_zero() {
        let a = map(&[0; 20]);
        assert_eq!(remap_fraction(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn modular_two_to_three_toy() {
        // hashes 0..6: h mod 2 = 0,1,0,1,0,1 and h mod 3 = 0,1,2,0,1,2
        let before = map(&[0, 1, 0, 1, 0, 1]);
        let after = map(&[0, 1, 2, 0, 1, 2]);
        assert_eq!(remap_fraction(&before, &after).unwrap(), 4.0 / 6.0);
    }

    #[test]
    fn counts_for_population_include_zeros() {
        let m = map(&[1, 1, 3]);
        assert_eq!(m.counts_for(&[sid(1), sid(2), sid(3)]), vec![2, 0, 1]);
    }

    proptest! {
        #[test]
        fn chi_squared_properties(counts in prop::collection::vec(0u64..50, 1..20), rot in 0usize..20) {
            let total: u64 = counts.iter().sum();
            prop_assume!(total > 0);
            let k = counts.len();
            let x = chi_squared(&counts, total, k).unwrap();
            prop_assert!(x >= 0.0);
            let mut rotated = counts.clone();
            rotated.rotate_left(rot % k);
            let y = chi_squared(&rotated, total, k).unwrap();
            prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
            let uniform = counts.iter().all(|&c| c as f64 * k as f64 == total as f64);
            prop_assert_eq!(x == 0.0, uniform);
        }

        #[test]
        fn mismatch_is_symmetric(a in prop::collection::vec(0u64..4, 0..40), b in prop::collection::vec(0u64..4, 0..40)) {
            let n = a.len().min(b.len());
            let (ma, mb) = (map(&a[..n]), map(&b[..n]));
            prop_assert_eq!(mismatch_rate(&ma, &mb).unwrap(), mismatch_rate(&mb, &ma).unwrap());
            prop_assert_eq!(remap_fraction(&ma, &mb).unwrap(), remap_fraction(&mb, &ma).unwrap());
        }
    }
}
