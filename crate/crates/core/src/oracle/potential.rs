//! Completion potential: the fewest edges of any feasible extension.
//!
//! Extensions have at least one edge, so a state sitting on a target node
//! still needs to leave and come back (or reach another target).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::instance::{CostVector, Instance, Signature, StepOutcome};

/// Edge count of the shortest feasible extension, or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Potential {
    Finite(u32),
    Infinite,
}

impl Potential {
    pub fn finite(self) -> Option<u32> {
        match self {
            Potential::Finite(h) => Some(h),
            Potential::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Potential::Finite(_))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Finite(h) => write!(f, "{h}"),
            Potential::Infinite => f.write_str("inf"),
        }
    }
}

/// Breadth-first search over `(signature, cost)` states from one start state.
pub fn completion_potential(instance: &Instance, sig: Signature, cost: &CostVector) -> Potential {
    let mut seen = BTreeSet::from([(sig, cost.clone())]);
    let mut queue = VecDeque::from([(sig, cost.clone(), 0u32)]);
    while let Some((sig, cost, depth)) = queue.pop_front() {
        for edge in instance.outgoing(sig.node) {
            let Ok(StepOutcome::Advanced { sig: next, cost: next_cost }) = instance.step(sig, &cost, edge) else {
                continue;
            };
            if instance.is_target(next.node) {
                return Potential::Finite(depth + 1);
            }
            if seen.insert((next, next_cost.clone())) {
                queue.push_back((next, next_cost, depth + 1));
            }
        }
    }
    Potential::Infinite
}

/// Memoized potentials. Every step raises a progressive level, so the state
/// graph is acyclic and recursion depth is bounded by the step bound.
#[derive(Clone, Debug)]
pub struct PotentialTable<'a> {
    instance: &'a Instance,
    memo: BTreeMap<(Signature, CostVector), Potential>,
}

impl<'a> PotentialTable<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            instance,
            memo: BTreeMap::new(),
        }
    }

    /// Fills the table for every reachable signature and every on-grid cost.
    pub fn full(instance: &'a Instance) -> Self {
        let mut table = Self::new(instance);
        for sig in instance.reachable_signatures() {
            for cost in grid_vectors(instance) {
                table.get(sig, &cost);
            }
        }
        table
    }

    pub fn get(&mut self, sig: Signature, cost: &CostVector) -> Potential {
        if let Some(&h) = self.memo.get(&(sig, cost.clone())) {
            return h;
        }
        let instance = self.instance;
        let mut best = Potential::Infinite;
        for edge in instance.outgoing(sig.node) {
            let Ok(StepOutcome::Advanced { sig: next, cost: next_cost }) = instance.step(sig, cost, edge) else {
                continue;
            };
            let via = if instance.is_target(next.node) {
                Potential::Finite(1)
            } else {
                match self.get(next, &next_cost) {
                    Potential::Finite(h) => Potential::Finite(h + 1),
                    Potential::Infinite => Potential::Infinite,
                }
            };
            best = best.min(via);
        }
        self.memo.insert((sig, cost.clone()), best);
        best
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Signature, CostVector), &Potential)> {
        self.memo.iter()
    }
}

/// Every cost index vector of the instance's grids, in lexicographic order.
pub fn grid_vectors(instance: &Instance) -> Vec<CostVector> {
    let sizes: Vec<u32> = (0..instance.dims()).map(|d| instance.grid(d).len() as u32).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; sizes.len()];
    if sizes.contains(&0) {
        return out;
    }
    loop {
        out.push(CostVector::new(cur.clone()));
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    fn state(inst: &Instance, node: &str, ctx: &str, cost: &[u32]) -> (Signature, CostVector) {
        (
            Signature::new(inst.node_by_name(node).unwrap(), inst.context_by_name(ctx).unwrap()),
            CostVector::new(cost.to_vec()),
        )
    }

    #[test]
    fn running_example_potentials() {
        let inst = running_example();
        let cases = [
            ("s", "init", [0, 0, 0], Potential::Finite(2)),
            ("a", "Z1", [1, 2, 0], Potential::Finite(1)),
            ("b", "Z2", [1, 1, 0], Potential::Finite(1)),
            ("b", "Z2", [1, 3, 1], Potential::Finite(1)),
            ("b", "Z2", [1, 4, 0], Potential::Infinite),
            ("a", "Z1", [2, 3, 0], Potential::Infinite),
        ];
        let mut table = PotentialTable::new(&inst);
        for (node, ctx, cost, want) in cases {
            let (sig, cost) = state(&inst, node, ctx, &cost);
            assert_eq!(completion_potential(&inst, sig, &cost), want, "{node} {cost:?}");
            assert_eq!(table.get(sig, &cost), want, "{node} {cost:?}");
        }
    }

    #[test]
    fn full_table_matches_bfs() {
        let inst = running_example();
        let table = PotentialTable::full(&inst);
        assert_eq!(table.len(), inst.reachable_signatures().len() * 30);
        for ((sig, cost), &h) in table.entries() {
            assert_eq!(completion_potential(&inst, *sig, cost), h);
        }
    }

    #[test]
    fn grid_vector_count() {
        assert_eq!(grid_vectors(&running_example()).len(), 30);
    }
}
