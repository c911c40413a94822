//! Deduplicated frontier with per-signature skylines and Pareto layers.
//!
//! Each signature owns a bucket of at most one entry per cost vector. Every
//! entry carries the number of same-bucket entries that strictly dominate
//! it; the skyline is the set of entries with a zero count. Inserting or
//! removing an entry touches only its own bucket and costs one dominance
//! comparison per other entry of that bucket.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{CostVector, EdgeId, Signature};
use crate::quantization::{BinIndex, Quantization};

/// Outcome of comparing two cost vectors componentwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `a <= b` componentwise and `a != b`.
    StrictlyDominates,
    /// `a == b`.
    Equal,
    /// `b` strictly dominates `a`.
    DominatedBy,
    Incomparable,
}

pub fn dominance(a: &CostVector, b: &CostVector) -> Dominance {
    debug_assert_eq!(a.dims(), b.dims());
    let mut a_better = false;
    let mut b_better = false;
    for (x, y) in a.indices().iter().zip(b.indices()) {
        if x < y {
            a_better = true;
        } else if y < x {
            b_better = true;
        }
        if a_better && b_better {
            return Dominance::Incomparable;
        }
    }
    match (a_better, b_better) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::StrictlyDominates,
        (false, true) => Dominance::DominatedBy,
        (true, true) => unreachable!(),
    }
}

/// Edge sequence from the source. Signatures and costs are replayed on demand.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathRecord(pub Vec<EdgeId>);

impl PathRecord {
    pub fn extended(&self, edge: EdgeId) -> PathRecord {
        let mut edges = Vec::with_capacity(self.0.len() + 1);
        edges.extend_from_slice(&self.0);
        edges.push(edge);
        PathRecord(edges)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierEntry {
    pub sig: Signature,
    pub cost: CostVector,
    pub rep: PathRecord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Slot {
    entry: FrontierEntry,
    dominators: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Bucket {
    slots: BTreeMap<CostVector, Slot>,
    skyline_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    /// The `(signature, cost)` pair was already present; the incumbent stays.
    Duplicate,
    Inserted {
        in_skyline: bool,
        /// Former skyline members of the same signature pushed down a layer.
        evicted: Vec<CostVector>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontierError {
    #[error("cost {cost} has {found} dimensions, frontier expects {expected}")]
    Arity {
        cost: CostVector,
        expected: usize,
        found: usize,
    },
    #[error("cost {cost} is off the grid in dimension {dim}")]
    OffGrid { cost: CostVector, dim: usize },
}

/// Frontier keyed by `(signature, cost)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frontier {
    grid_sizes: Vec<u32>,
    buckets: BTreeMap<Signature, Bucket>,
    len: usize,
    comparisons: u64,
}

impl Frontier {
    /// `grid_sizes[i]` is the number of levels of dimension `i`.
    pub fn new(grid_sizes: Vec<u32>) -> Self {
        Self {
            grid_sizes,
            buckets: BTreeMap::new(),
            len: 0,
            comparisons: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of signatures with at least one entry.
    pub fn active_signatures(&self) -> usize {
        self.buckets.len()
    }

    pub fn signatures(&self) -> impl Iterator<Item = Signature> + '_ {
        self.buckets.keys().copied()
    }

    /// Dominance comparisons performed by insert/remove since construction.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn contains(&self, sig: Signature, cost: &CostVector) -> bool {
        self.get(sig, cost).is_some()
    }

    pub fn get(&self, sig: Signature, cost: &CostVector) -> Option<&FrontierEntry> {
        self.buckets.get(&sig)?.slots.get(cost).map(|s| &s.entry)
    }

    /// All entries, ordered by signature then cost.
    pub fn entries(&self) -> impl Iterator<Item = &FrontierEntry> + '_ {
        self.buckets
            .values()
            .flat_map(|b| b.slots.values().map(|s| &s.entry))
    }

    pub fn entries_of(&self, sig: Signature) -> impl Iterator<Item = &FrontierEntry> + '_ {
        self.buckets
            .get(&sig)
            .into_iter()
            .flat_map(|b| b.slots.values().map(|s| &s.entry))
    }

    fn check(&self, cost: &CostVector) -> Result<(), FrontierError> {
        if cost.dims() != self.grid_sizes.len() {
            return Err(FrontierError::Arity {
                cost: cost.clone(),
                expected: self.grid_sizes.len(),
                found: cost.dims(),
            });
        }
        if let Some(dim) = (0..cost.dims()).find(|&i| cost.get(i) >= self.grid_sizes[i]) {
            return Err(FrontierError::OffGrid {
                cost: cost.clone(),
                dim,
            });
        }
        Ok(())
    }

    pub fn insert(&mut self, entry: FrontierEntry) -> Result<InsertOutcome, FrontierError> {
        self.check(&entry.cost)?;
        let bucket = self.buckets.entry(entry.sig).or_default();
        if bucket.slots.contains_key(&entry.cost) {
            return Ok(InsertOutcome::Duplicate);
        }
        let mut dominators = 0u32;
        let mut evicted = Vec::new();
        for (cost, slot) in bucket.slots.iter_mut() {
            self.comparisons += 1;
            match dominance(&entry.cost, cost) {
                Dominance::StrictlyDominates => {
                    if slot.dominators == 0 {
                        evicted.push(cost.clone());
                        bucket.skyline_len -= 1;
                    }
                    slot.dominators += 1;
                }
                Dominance::DominatedBy => dominators += 1,
                Dominance::Incomparable => {}
                Dominance::Equal => unreachable!("duplicates are filtered above"),
            }
        }
        let in_skyline = dominators == 0;
        if in_skyline {
            bucket.skyline_len += 1;
        }
        bucket.slots.insert(entry.cost.clone(), Slot { entry, dominators });
        self.len += 1;
        Ok(InsertOutcome::Inserted { in_skyline, evicted })
    }

    /// Removes an entry; entries it alone dominated rise into the skyline.
    pub fn remove(&mut self, sig: Signature, cost: &CostVector) -> Option<FrontierEntry> {
        let bucket = self.buckets.get_mut(&sig)?;
        let removed = bucket.slots.remove(cost)?;
        if removed.dominators == 0 {
            bucket.skyline_len -= 1;
        }
        for (other, slot) in bucket.slots.iter_mut() {
            self.comparisons += 1;
            if dominance(cost, other) == Dominance::StrictlyDominates {
                slot.dominators -= 1;
                if slot.dominators == 0 {
                    bucket.skyline_len += 1;
                }
            }
        }
        if bucket.slots.is_empty() {
            self.buckets.remove(&sig);
        }
        self.len -= 1;
        Some(removed.entry)
    }

    /// First Pareto layer of every signature, ordered by signature then cost.
    pub fn skyline(&self) -> impl Iterator<Item = &FrontierEntry> + '_ {
        self.buckets.values().flat_map(|b| {
            b.slots
                .values()
                .filter(|s| s.dominators == 0)
                .map(|s| &s.entry)
        })
    }

    pub fn skyline_len(&self) -> usize {
        self.buckets.values().map(|b| b.skyline_len).sum()
    }

    pub fn skyline_of(&self, sig: Signature) -> Vec<&CostVector> {
        self.buckets
            .get(&sig)
            .into_iter()
            .flat_map(|b| b.slots.iter().filter(|(_, s)| s.dominators == 0).map(|(c, _)| c))
            .collect()
    }

    /// Full Pareto layer decomposition, recomputed from scratch. Layer `k`
    /// is the union over signatures of the `k`-th per-signature shell.
    pub fn pareto_layers(&self) -> Vec<Vec<&FrontierEntry>> {
        let mut layers: Vec<Vec<&FrontierEntry>> = Vec::new();
        for bucket in self.buckets.values() {
            let entries: Vec<&FrontierEntry> = bucket.slots.values().map(|s| &s.entry).collect();
            for (k, shell) in layer_decomposition(&entries, |e| &e.cost).into_iter().enumerate() {
                if layers.len() <= k {
                    layers.push(Vec::new());
                }
                layers[k].extend(shell);
            }
        }
        layers
    }

    /// Per-signature shells: `result[k][sig]` is the `k`-th layer of `sig`.
    pub fn pareto_layers_by_signature(&self) -> Vec<BTreeMap<Signature, Vec<&FrontierEntry>>> {
        let mut layers: Vec<BTreeMap<Signature, Vec<&FrontierEntry>>> = Vec::new();
        for (sig, bucket) in &self.buckets {
            let entries: Vec<&FrontierEntry> = bucket.slots.values().map(|s| &s.entry).collect();
            for (k, shell) in layer_decomposition(&entries, |e| &e.cost).into_iter().enumerate() {
                if layers.len() <= k {
                    layers.push(BTreeMap::new());
                }
                layers[k].insert(*sig, shell);
            }
        }
        layers
    }
}

/// Non-dominated subset by quadratic filtering, preserving input order.
pub fn non_dominated<T: Clone, F: Fn(&T) -> &CostVector>(items: &[T], cost: F) -> Vec<T> {
    items
        .iter()
        .filter(|a| {
            !items
                .iter()
                .any(|b| dominance(cost(b), cost(a)) == Dominance::StrictlyDominates)
        })
        .cloned()
        .collect()
}

/// Iterated non-dominated extraction. Never yields an empty layer.
pub fn layer_decomposition<T: Clone, F: Fn(&T) -> &CostVector + Copy>(items: &[T], cost: F) -> Vec<Vec<T>> {
    let mut residual: Vec<T> = items.to_vec();
    let mut layers = Vec::new();
    while !residual.is_empty() {
        let keep: Vec<bool> = residual
            .iter()
            .map(|a| {
                !residual
                    .iter()
                    .any(|b| dominance(cost(b), cost(a)) == Dominance::StrictlyDominates)
            })
            .collect();
        let mut layer = Vec::new();
        let mut rest = Vec::new();
        for (item, on_layer) in residual.into_iter().zip(keep) {
            if on_layer {
                layer.push(item);
            } else {
                rest.push(item);
            }
        }
        layers.push(layer);
        residual = rest;
    }
    layers
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WidthViolation {
    #[error("layer {layer} of signature {sig:?} holds {width} entries, more than B* = {bound}")]
    TooWide {
        layer: usize,
        sig: Signature,
        width: usize,
        bound: u64,
    },
    #[error("layer {layer} of signature {sig:?} has two entries in bin {bin:?}")]
    BinCollision {
        layer: usize,
        sig: Signature,
        bin: BinIndex,
    },
    #[error("layer {layer} is empty but a deeper layer is not")]
    EmptyLayer { layer: usize },
    #[error("global layer {layer} holds {width} entries, more than W = {bound}")]
    GlobalTooWide { layer: usize, width: usize, bound: u64 },
}

/// Measured layer geometry of one frontier snapshot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WidthReport {
    pub layers: usize,
    pub max_signature_layer_width: usize,
    pub max_global_layer_width: usize,
    pub active_signatures: usize,
    pub bin_count: u64,
}

/// Checks layer contiguity, bin exclusivity and the width bounds on a
/// frontier snapshot.
pub fn layer_width_check(frontier: &Frontier, q: &Quantization) -> Result<WidthReport, WidthViolation> {
    let bound = q.bin_count();
    let by_sig = frontier.pareto_layers_by_signature();
    let global_bound = q.skyline_width_bound(frontier.active_signatures() as u64);
    let mut report = WidthReport {
        layers: by_sig.len(),
        active_signatures: frontier.active_signatures(),
        bin_count: bound,
        ..Default::default()
    };
    for (layer, shells) in by_sig.iter().enumerate() {
        let mut global = 0usize;
        for (&sig, shell) in shells {
            if shell.len() as u64 > bound {
                return Err(WidthViolation::TooWide {
                    layer,
                    sig,
                    width: shell.len(),
                    bound,
                });
            }
            let mut bins = std::collections::BTreeSet::new();
            for entry in shell {
                let bin = q.bin_index(&entry.cost);
                if !bins.insert(bin.clone()) {
                    return Err(WidthViolation::BinCollision { layer, sig, bin });
                }
            }
            report.max_signature_layer_width = report.max_signature_layer_width.max(shell.len());
            global += shell.len();
        }
        if global == 0 && layer + 1 < by_sig.len() {
            return Err(WidthViolation::EmptyLayer { layer });
        }
        if global as u64 > global_bound {
            return Err(WidthViolation::GlobalTooWide {
                layer,
                width: global,
                bound: global_bound,
            });
        }
        report.max_global_layer_width = report.max_global_layer_width.max(global);
    }
    Ok(report)
}
