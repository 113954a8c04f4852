//! Rhythmic heterogeneity: normalized permutation entropy over tie-aware
//! ordinal patterns of inter-onset intervals.
//!
//! Equal durations share a rank (dense ranking), so the number of possible
//! patterns of length `d` is the number of weak orderings of `d` items (3 for
//! pairs, 13 for triples), not `d!`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Dense rank vector of a window of durations. `(30, 10, 30)` -> `(1, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalPattern(Vec<u8>);

impl OrdinalPattern {
    pub fn ranks(&self) -> &[u8] {
        &self.0
    }
}

/// Compute the ordinal pattern of one window.
pub fn ordinal_pattern(window: &[u64]) -> Result<OrdinalPattern> {
    if window.len() < 2 {
        return Err(Error::Argument(format!(
            "ordinal patterns need at least 2 values, got {}",
            window.len()
        )));
    }
    let mut distinct: Vec<u64> = window.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ranks = window
        .iter()
        .map(|v| distinct.binary_search(v).expect("value present") as u8)
        .collect();
    Ok(OrdinalPattern(ranks))
}

/// Number of tie-aware patterns of length `d`: the ordered Bell numbers,
/// `a(d) = sum_k C(d, k) * a(d - k)`.
pub fn count_patterns(d: usize) -> Result<u64> {
    if !(2..=8).contains(&d) {
        return Err(Error::Argument(format!("pattern length must be in 2..=8, got {d}")));
    }
    let mut bell = vec![1u64; d + 1];
    for n in 1..=d {
        let mut total = 0u64;
        for k in 1..=n {
            total += binomial(n as u64, k as u64) * bell[n - k];
        }
        bell[n] = total;
    }
    Ok(bell[d])
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Relative frequencies of the ordinal patterns of all length-`d` windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDistribution {
    counts: BTreeMap<OrdinalPattern, u64>,
    d: usize,
    total: u64,
}

impl PatternDistribution {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, pattern: &OrdinalPattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OrdinalPattern, u64)> {
        self.counts.iter().map(|(p, &c)| (p, c))
    }

    pub fn distinct_patterns(&self) -> usize {
        self.counts.len()
    }
}

/// Slide a window of length `d` over the series, advancing by `stride`.
pub fn pattern_distribution(values: &[u64], d: usize, stride: usize) -> Result<PatternDistribution> {
    count_patterns(d)?;
    if stride == 0 {
        return Err(Error::Argument("stride must be at least 1".into()));
    }
    if values.len() < d {
        return Err(Error::InsufficientData(format!(
            "series of length {} is shorter than the window length {d}",
            values.len()
        )));
    }
    let mut counts: BTreeMap<OrdinalPattern, u64> = BTreeMap::new();
    let mut start = 0usize;
    let mut total = 0u64;
    while start + d <= values.len() {
        let pattern = ordinal_pattern(&values[start..start + d])?;
        *counts.entry(pattern).or_insert(0) += 1;
        total += 1;
        start += stride;
    }
    Ok(PatternDistribution { counts, d, total })
}

/// Normalized permutation entropy in `[0, 1]`:
/// `-(1 / ln N_d) * sum p ln p`, with `0 ln 0 = 0`.
pub fn permutation_entropy(dist: &PatternDistribution) -> Result<f64> {
    if dist.total == 0 {
        return Err(Error::InsufficientData("empty pattern distribution".into()));
    }
    let n_d = count_patterns(dist.d)? as f64;
    let total = dist.total as f64;
    let mut raw = 0.0;
    for (_, count) in dist.iter() {
        let p = count as f64 / total;
        raw -= p * p.ln();
    }
    Ok(raw / n_d.ln())
}

/// Convenience wrapper: distribution + entropy in one step.
pub fn heterogeneity(values: &[u64], d: usize, stride: usize) -> Result<f64> {
    permutation_entropy(&pattern_distribution(values, d, stride)?)
}
