//! Skyline-First extraction.
//!
//! Candidates come from the skyline only. An entry whose bin has not been
//! extracted yet is preferred; among equals the first in (signature, cost)
//! order wins.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::frontier::{Frontier, FrontierEntry};
use crate::quantization::{BinIndex, Quantization};

/// Bins already extracted. Grows monotonically over a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageSet {
    covered: BTreeSet<BinIndex>,
}

impl CoverageSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, bin: &BinIndex) -> bool {
        self.covered.contains(bin)
    }

    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }

    pub fn bins(&self) -> impl Iterator<Item = &BinIndex> {
        self.covered.iter()
    }

    fn insert(&mut self, bin: BinIndex) -> bool {
        self.covered.insert(bin)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("cannot extract from an empty frontier")]
    EmptyFrontier,
}

/// What one extraction removed and what it saw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extraction {
    pub entry: FrontierEntry,
    pub bin: BinIndex,
    /// Whether the bin was new to the coverage set.
    pub fresh_bin: bool,
    /// Skyline size right before the extraction.
    pub skyline_size: usize,
    /// Whether any skyline entry had an uncovered bin.
    pub uncovered_available: bool,
}

/// Picks, removes and returns a skyline entry, recording its bin as covered.
pub fn extract(
    frontier: &mut Frontier,
    coverage: &mut CoverageSet,
    q: &Quantization,
) -> Result<Extraction, SchedulerError> {
    let mut first: Option<&FrontierEntry> = None;
    let mut uncovered: Option<&FrontierEntry> = None;
    let mut skyline_size = 0;
    for entry in frontier.skyline() {
        skyline_size += 1;
        first.get_or_insert(entry);
        if uncovered.is_none() && !coverage.contains(&q.bin_index(&entry.cost)) {
            uncovered = Some(entry);
        }
    }
    let chosen = uncovered.or(first).ok_or(SchedulerError::EmptyFrontier)?;
    let uncovered_available = uncovered.is_some();
    let (sig, cost) = (chosen.sig, chosen.cost.clone());
    let entry = frontier.remove(sig, &cost).expect("chosen entry is in the frontier");
    let bin = q.bin_index(&entry.cost);
    let fresh_bin = coverage.insert(bin.clone());
    Ok(Extraction {
        entry,
        bin,
        fresh_bin,
        skyline_size,
        uncovered_available,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverageReport {
    pub covered: usize,
    pub bin_count: u64,
    pub ratio: f64,
}

pub fn coverage_stats(coverage: &CoverageSet, q: &Quantization) -> CoverageReport {
    let bin_count = q.bin_count();
    CoverageReport {
        covered: coverage.len(),
        bin_count,
        ratio: coverage.len() as f64 / bin_count as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::frontier::PathRecord;
    use crate::instance::{ContextId, CostVector, NodeId, Signature};
    use crate::quantization::rank_quantization;

    fn entry(n: u32, c: u32, cost: &[u32]) -> FrontierEntry {
        FrontierEntry {
            sig: Signature::new(NodeId(n), ContextId(c)),
            cost: CostVector::new(cost.to_vec()),
            rep: PathRecord::default(),
        }
    }

    #[test]
    fn first_extraction_covers_origin_bin() {
        let q = rank_quantization(&running_example());
        let mut f = Frontier::new(vec![3, 5, 2]);
        f.insert(entry(0, 0, &[0, 0, 0])).unwrap();
        let mut cov = CoverageSet::new();
        let ex = extract(&mut f, &mut cov, &q).unwrap();
        assert_eq!(ex.entry, entry(0, 0, &[0, 0, 0]));
        assert!(ex.fresh_bin);
        assert!(f.is_empty());
        assert_eq!(cov.bins().collect::<Vec<_>>(), vec![&BinIndex(vec![0, 0, 0])]);
    }

    #[test]
    fn tie_break_prefers_smaller_signature() {
        let q = rank_quantization(&running_example());
        let mut f = Frontier::new(vec![3, 5, 2]);
        // (b, Z2) inserted first; (a, Z1) still orders first.
        f.insert(entry(2, 2, &[1, 1, 0])).unwrap();
        f.insert(entry(1, 1, &[1, 2, 0])).unwrap();
        let mut cov = CoverageSet::new();
        let ex = extract(&mut f, &mut cov, &q).unwrap();
        assert_eq!(ex.entry, entry(1, 1, &[1, 2, 0]));
        assert_eq!(ex.skyline_size, 2);
    }

    #[test]
    fn uncovered_bin_wins_over_order() {
        let q = rank_quantization(&running_example());
        let mut f = Frontier::new(vec![3, 5, 2]);
        f.insert(entry(1, 1, &[1, 2, 0])).unwrap();
        f.insert(entry(2, 2, &[1, 1, 0])).unwrap();
        let mut cov = CoverageSet::new();
        cov.insert(BinIndex(vec![1, 2, 0]));
        let ex = extract(&mut f, &mut cov, &q).unwrap();
        assert_eq!(ex.entry, entry(2, 2, &[1, 1, 0]));
        assert!(ex.uncovered_available && ex.fresh_bin);
    }

    #[test]
    fn all_covered_falls_back_to_order() {
        let q = rank_quantization(&running_example());
        let mut f = Frontier::new(vec![3, 5, 2]);
        f.insert(entry(2, 2, &[1, 1, 0])).unwrap();
        f.insert(entry(1, 1, &[1, 2, 0])).unwrap();
        let mut cov = CoverageSet::new();
        cov.insert(BinIndex(vec![1, 2, 0]));
        cov.insert(BinIndex(vec![1, 1, 0]));
        let ex = extract(&mut f, &mut cov, &q).unwrap();
        assert_eq!(ex.entry, entry(1, 1, &[1, 2, 0]));
        assert!(!ex.fresh_bin);
        assert_eq!(cov.len(), 2);
    }

    #[test]
    fn empty_frontier_errors() {
        let q = rank_quantization(&running_example());
        let mut f = Frontier::new(vec![3, 5, 2]);
        assert_eq!(
            extract(&mut f, &mut CoverageSet::new(), &q).unwrap_err(),
            SchedulerError::EmptyFrontier
        );
    }

    #[test]
    fn coverage_ratio() {
        let q = rank_quantization(&running_example());
        let mut cov = CoverageSet::new();
        assert_eq!(coverage_stats(&cov, &q).covered, 0);
        cov.insert(BinIndex(vec![0, 0, 0]));
        cov.insert(BinIndex(vec![1, 2, 0]));
        let r = coverage_stats(&cov, &q);
        assert_eq!((r.covered, r.bin_count), (2, 30));
        for a in 0..3 {
            for b in 0..5 {
                for c in 0..2 {
                    cov.insert(BinIndex(vec![a, b, c]));
                }
            }
        }
        assert_eq!(coverage_stats(&cov, &q).ratio, 1.0);
    }
}
