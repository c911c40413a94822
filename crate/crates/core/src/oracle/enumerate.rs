//! Exhaustive depth-first enumeration of feasible paths.

use std::collections::BTreeMap;

use crate::frontier::{layer_decomposition, non_dominated, PathRecord};
use crate::instance::{CostVector, Instance, Signature, StepOutcome};
use crate::oracle::OracleError;

/// Largest step bound the enumerator accepts by default.
pub const DEFAULT_LAMBDA_CAP: u64 = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasiblePath {
    pub path: PathRecord,
    pub sig: Signature,
    pub cost: CostVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEnumeration {
    /// Sorted by signature, then cost, then edge sequence.
    pub feasible: Vec<FeasiblePath>,
    /// Non-dominated cost set of each target signature.
    pub by_signature_pareto: BTreeMap<Signature, Vec<CostVector>>,
    /// Costs minimal under componentwise order over all feasible paths.
    pub global_front: Vec<CostVector>,
}

impl OracleEnumeration {
    /// Per-signature Pareto layers of the feasible paths; layer `k` is the
    /// union over signatures of each signature's `k`-th shell.
    pub fn layers(&self) -> Vec<Vec<&FeasiblePath>> {
        let mut by_sig: BTreeMap<Signature, Vec<&FeasiblePath>> = BTreeMap::new();
        for p in &self.feasible {
            by_sig.entry(p.sig).or_default().push(p);
        }
        let mut layers: Vec<Vec<&FeasiblePath>> = Vec::new();
        for paths in by_sig.values() {
            for (k, shell) in layer_decomposition(paths, |p| &p.cost).into_iter().enumerate() {
                if layers.len() <= k {
                    layers.push(Vec::new());
                }
                layers[k].extend(shell);
            }
        }
        layers
    }
}

pub fn enumerate_feasible(instance: &Instance) -> Result<OracleEnumeration, OracleError> {
    enumerate_feasible_with_cap(instance, DEFAULT_LAMBDA_CAP)
}

/// Every path of 1..=Λ edges from the source that stays within budget and
/// ends at a target. Refuses instances whose Λ exceeds `cap`.
pub fn enumerate_feasible_with_cap(instance: &Instance, cap: u64) -> Result<OracleEnumeration, OracleError> {
    let lambda = instance.max_step_count()?;
    if lambda > cap {
        return Err(OracleError::CapExceeded { lambda, cap });
    }
    let mut feasible = Vec::new();
    let mut path = Vec::new();
    dfs(
        instance,
        instance.initial_signature(),
        &instance.initial_cost(),
        lambda,
        &mut path,
        &mut feasible,
    )?;
    feasible.sort_by(|a, b| (a.sig, &a.cost, &a.path).cmp(&(b.sig, &b.cost, &b.path)));

    let mut by_sig: BTreeMap<Signature, Vec<CostVector>> = BTreeMap::new();
    for p in &feasible {
        let costs = by_sig.entry(p.sig).or_default();
        if !costs.contains(&p.cost) {
            costs.push(p.cost.clone());
        }
    }
    let by_signature_pareto = by_sig
        .into_iter()
        .map(|(sig, costs)| {
            let mut front = non_dominated(&costs, |c| c);
            front.sort();
            (sig, front)
        })
        .collect();
    let mut all: Vec<CostVector> = feasible.iter().map(|p| p.cost.clone()).collect();
    all.sort();
    all.dedup();
    let global_front = non_dominated(&all, |c| c);

    Ok(OracleEnumeration {
        feasible,
        by_signature_pareto,
        global_front,
    })
}

fn dfs(
    instance: &Instance,
    sig: Signature,
    cost: &CostVector,
    remaining: u64,
    path: &mut Vec<crate::instance::EdgeId>,
    out: &mut Vec<FeasiblePath>,
) -> Result<(), OracleError> {
    if remaining == 0 {
        return Ok(());
    }
    for edge in instance.outgoing(sig.node) {
        let StepOutcome::Advanced { sig: next, cost: next_cost } = instance.step(sig, cost, edge)? else {
            continue;
        };
        path.push(edge.id);
        if instance.is_target(next.node) {
            out.push(FeasiblePath {
                path: PathRecord(path.clone()),
                sig: next,
                cost: next_cost.clone(),
            });
        }
        dfs(instance, next, &next_cost, remaining - 1, path, out)?;
        path.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    #[test]
    fn running_example_has_three_paths() {
        let inst = running_example();
        let e = enumerate_feasible(&inst).unwrap();
        let mut got: Vec<String> = e
            .feasible
            .iter()
            .map(|p| format!("{}@{}", inst.format_cost(&p.cost), inst.format_signature(p.sig)))
            .collect();
        got.sort();
        assert_eq!(got, vec!["(1,2,0)@(t,Z2)", "(1,4,1)@(t,Z2)", "(2,4,0)@(t,Z1)"]);
        assert_eq!(e.by_signature_pareto.len(), 2);
        assert_eq!(e.global_front, vec![CostVector::new(vec![1, 2, 0])]);
        let layers = e.layers();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].len(), 2);
        assert_eq!(inst.format_cost(&layers[1][0].cost), "(1,4,1)");
    }

    #[test]
    fn cap_is_enforced() {
        let inst = running_example();
        assert!(matches!(
            enumerate_feasible_with_cap(&inst, 3),
            Err(OracleError::CapExceeded { lambda: 4, cap: 3 })
        ));
    }
}
