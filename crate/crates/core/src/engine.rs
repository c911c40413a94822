//! The search loop: extract, expand, record solutions, insert successors,
//! check the stopping certificate.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::frontier::{Frontier, FrontierEntry, FrontierError, PathRecord};
use crate::instance::{validate_instance, CostVector, Instance, InstanceError, Level, Signature, StepOutcome, ValidationReport};
use crate::quantization::{rank_quantization, BinIndex, Quantization};
use crate::scheduler::{extract, CoverageSet, SchedulerError};

/// Constant `c` in `ops <= c * t* * Δ * W * d`.
///
/// Per extraction the engine evaluates at most `Δ * d` rule applications and
/// compares each inserted or removed cost against the other entries of its
/// signature, of which there are fewer than `B*`. That gives at most
/// `Δ*d + (Δ+1)*B* <= 3*Δ*W*d` operations per step (with `Δ >= 1`).
pub const RUNTIME_CONSTANT: u64 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Check the certificate every `cert_period` extractions (1 = always).
    pub cert_period: u64,
    pub step_limit: Option<u64>,
    /// Keep a copy of the frontier before every extraction.
    pub record_snapshots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cert_period: 1,
            step_limit: None,
            record_snapshots: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub path: PathRecord,
    pub cost: CostVector,
    pub sig: Signature,
    pub discovered_at_step: u64,
}

/// Cumulative operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// One per dimension per generated successor.
    pub cost_updates: u64,
    /// Comparisons made while maintaining per-signature skylines.
    pub dominance_comparisons: u64,
    /// Solution-versus-skyline comparisons made by certificate checks.
    pub certificate_comparisons: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub sig: Signature,
    pub cost: CostVector,
    pub bin: BinIndex,
    pub skyline_size_before: usize,
    pub frontier_size_after: usize,
    pub active_signatures_after: usize,
    /// Coverage size after the extraction.
    pub covered_bins: usize,
    /// Distinct (signature, cost) solutions so far.
    pub solutions_count: usize,
    /// Feasible paths generated so far, duplicates included.
    pub completions: u64,
    /// Certificate status after this step; `false` when not checked.
    pub certificate_held: bool,
    pub ops: OpCounters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    CertificateHeld,
    FrontierExhausted,
    StepLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::CertificateHeld => "certificate-held",
            Termination::FrontierExhausted => "frontier-exhausted",
            Termination::StepLimit => "step-limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub config: RunConfig,
    pub solutions: Vec<SolutionRecord>,
    pub trace: Vec<TraceEvent>,
    pub termination: Termination,
    pub final_frontier: Frontier,
    /// Frontier before each extraction; empty unless requested.
    pub snapshots: Vec<Frontier>,
    pub delta_min: Vec<Level>,
    pub peak_active_signatures: usize,
    /// Sum over certificate checks of `|skyline| * |solutions|`.
    pub certificate_work_bound: u64,
    pub ops: OpCounters,
}

impl SearchResult {
    pub fn steps(&self) -> u64 {
        self.trace.len() as u64
    }

    pub fn completions(&self) -> u64 {
        self.trace.last().map_or(0, |e| e.completions)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Frontier(#[from] FrontierError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

/// True iff every skyline entry `p` has a solution `s` with
/// `C(s) <= C(p) + delta_min` componentwise. Compares level values, since
/// `C(p) + delta_min` may fall between grid levels.
pub fn certificate_holds<'a>(
    instance: &Instance,
    skyline: impl IntoIterator<Item = &'a FrontierEntry>,
    solutions: &[SolutionRecord],
    delta_min: &[Level],
) -> bool {
    let solution_values: Vec<Vec<Level>> = solutions.iter().map(|s| instance.cost_values(&s.cost)).collect();
    check_certificate(instance, skyline, &solution_values, delta_min).0
}

/// Returns the verdict and the number of solution comparisons made.
fn check_certificate<'a>(
    instance: &Instance,
    skyline: impl IntoIterator<Item = &'a FrontierEntry>,
    solution_values: &[Vec<Level>],
    delta_min: &[Level],
) -> (bool, u64) {
    let mut comparisons = 0;
    for entry in skyline {
        let bound: Vec<Level> = instance
            .cost_values(&entry.cost)
            .into_iter()
            .zip(delta_min)
            .map(|(c, d)| c + d)
            .collect();
        let covered = solution_values.iter().any(|s| {
            comparisons += 1;
            s.iter().zip(&bound).all(|(a, b)| a <= b)
        });
        if !covered {
            return (false, comparisons);
        }
    }
    (true, comparisons)
}

/// Runs Skyline-First search to termination.
pub fn run(instance: &Instance, config: &RunConfig) -> Result<SearchResult, EngineError> {
    let report = validate_instance(instance);
    if !report.is_valid() {
        return Err(EngineError::Invalid(report));
    }
    let delta_min = instance.delta_min_vector()?;
    let q = rank_quantization(instance);
    let period = config.cert_period.max(1);
    let dims = instance.dims() as u64;

    let grid_sizes = (0..instance.dims()).map(|d| instance.grid(d).len() as u32).collect();
    let mut frontier = Frontier::new(grid_sizes);
    frontier.insert(FrontierEntry {
        sig: instance.initial_signature(),
        cost: instance.initial_cost(),
        rep: PathRecord::default(),
    })?;

    let mut coverage = CoverageSet::new();
    let mut solutions: Vec<SolutionRecord> = Vec::new();
    let mut solution_values: Vec<Vec<Level>> = Vec::new();
    let mut solution_keys: BTreeSet<(Signature, CostVector)> = BTreeSet::new();
    let mut trace = Vec::new();
    let mut snapshots = Vec::new();
    let mut ops = OpCounters::default();
    let mut completions = 0u64;
    let mut peak_active = frontier.active_signatures();
    let mut certificate_work_bound = 0u64;

    let mut check = |frontier: &Frontier, solution_values: &[Vec<Level>], ops: &mut OpCounters| {
        certificate_work_bound += (frontier.skyline_len() * solution_values.len()) as u64;
        let (held, n) = check_certificate(instance, frontier.skyline(), solution_values, &delta_min);
        ops.certificate_comparisons += n;
        held
    };

    let mut certified = check(&frontier, &solution_values, &mut ops);
    let mut step = 0u64;
    let termination = loop {
        if frontier.is_empty() {
            break Termination::FrontierExhausted;
        }
        if certified {
            break Termination::CertificateHeld;
        }
        if config.step_limit.is_some_and(|limit| step >= limit) {
            break Termination::StepLimit;
        }
        if config.record_snapshots {
            snapshots.push(frontier.clone());
        }

        let extraction = extract(&mut frontier, &mut coverage, &q)?;
        step += 1;
        let parent = &extraction.entry;
        for edge in instance.outgoing(parent.sig.node) {
            ops.cost_updates += dims;
            let StepOutcome::Advanced { sig, cost } = instance.step(parent.sig, &parent.cost, edge)? else {
                continue;
            };
            let path = parent.rep.extended(edge.id);
            if instance.is_target(sig.node) {
                completions += 1;
                if solution_keys.insert((sig, cost.clone())) {
                    solution_values.push(instance.cost_values(&cost));
                    solutions.push(SolutionRecord {
                        path: path.clone(),
                        cost: cost.clone(),
                        sig,
                        discovered_at_step: step,
                    });
                }
            }
            if instance.out_degree(sig.node) > 0 {
                frontier.insert(FrontierEntry { sig, cost, rep: path })?;
            }
        }
        peak_active = peak_active.max(frontier.active_signatures());
        ops.dominance_comparisons = frontier.comparisons();

        certified = step.is_multiple_of(period) && check(&frontier, &solution_values, &mut ops);

        trace.push(TraceEvent {
            step,
            sig: extraction.entry.sig,
            cost: extraction.entry.cost.clone(),
            bin: extraction.bin,
            skyline_size_before: extraction.skyline_size,
            frontier_size_after: frontier.len(),
            active_signatures_after: frontier.active_signatures(),
            covered_bins: coverage.len(),
            solutions_count: solutions.len(),
            completions,
            certificate_held: certified,
            ops,
        });
    };

    Ok(SearchResult {
        config: config.clone(),
        solutions,
        trace,
        termination,
        final_frontier: frontier,
        snapshots,
        delta_min,
        peak_active_signatures: peak_active,
        certificate_work_bound,
        ops,
    })
}

/// Measured operation counts against the structural bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub steps: u64,
    pub max_out_degree: u64,
    pub peak_active_signatures: u64,
    pub bin_count: u64,
    pub peak_width: u64,
    pub dims: u64,
    pub constant: u64,
    /// `c * t* * max(Δ,1) * W * d`.
    pub bound: u64,
    /// Cost updates plus skyline-maintenance comparisons.
    pub measured: u64,
    pub certificate_comparisons: u64,
    pub certificate_work_bound: u64,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.measured <= self.bound && self.certificate_comparisons <= self.certificate_work_bound
    }
}

pub fn runtime_bound_check(result: &SearchResult, instance: &Instance, q: &Quantization) -> BoundReport {
    let steps = result.steps();
    let max_out_degree = instance.max_out_degree() as u64;
    let peak_active = result.peak_active_signatures as u64;
    let bin_count = q.bin_count();
    let peak_width = q.skyline_width_bound(peak_active);
    let dims = instance.dims() as u64;
    BoundReport {
        steps,
        max_out_degree,
        peak_active_signatures: peak_active,
        bin_count,
        peak_width,
        dims,
        constant: RUNTIME_CONSTANT,
        bound: RUNTIME_CONSTANT * steps * max_out_degree.max(1) * peak_width * dims,
        measured: result.ops.cost_updates + result.ops.dominance_comparisons,
        certificate_comparisons: result.ops.certificate_comparisons,
        certificate_work_bound: result.certificate_work_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::instance::{AttributeId, CostGrid, CostRule, Dimension, InstanceParts, NodeId};

    fn names(inst: &Instance, sig: Signature, cost: &CostVector) -> String {
        format!("{}{}", inst.format_signature(sig), inst.format_cost(cost))
    }

    #[test]
    fn running_example_trace() {
        let inst = running_example();
        let res = run(&inst, &RunConfig::default()).unwrap();
        assert_eq!(res.termination, Termination::CertificateHeld);
        let steps: Vec<String> = res.trace.iter().map(|e| names(&inst, e.sig, &e.cost)).collect();
        assert_eq!(steps, vec!["(s,init)(0,0,0)", "(a,Z1)(1,2,0)", "(b,Z2)(1,1,0)"]);
        let sols: Vec<String> = res.solutions.iter().map(|s| names(&inst, s.sig, &s.cost)).collect();
        assert_eq!(sols, vec!["(t,Z1)(2,4,0)", "(t,Z2)(1,2,0)"]);
        assert_eq!(res.trace[0].covered_bins, 1);
        assert_eq!(res.trace[1].covered_bins, 2);
        assert_eq!(res.trace[1].skyline_size_before, 2);
        assert!(res.trace.last().unwrap().certificate_held);
        assert!(!res.trace[0].certificate_held);
    }

    #[test]
    fn certificate_examples() {
        let inst = running_example();
        let delta = inst.delta_min_vector().unwrap();
        let t = inst.node_by_name("t").unwrap();
        let z2 = inst.context_by_name("Z2").unwrap();
        let p = FrontierEntry {
            sig: Signature::new(t, z2),
            cost: CostVector::new(vec![1, 2, 0]),
            rep: PathRecord::default(),
        };
        let sol = SolutionRecord {
            path: PathRecord::default(),
            cost: CostVector::new(vec![1, 2, 0]),
            sig: p.sig,
            discovered_at_step: 1,
        };
        assert!(certificate_holds(&inst, [&p], std::slice::from_ref(&sol), &delta));
        assert!(!certificate_holds(&inst, [&p], &[], &delta));
        assert!(certificate_holds(&inst, [], &[], &delta));
    }

    fn tiny(edges: &[(u32, u32, i64)], n: usize, budget: i64, target: u32) -> Instance {
        Instance::new(InstanceParts {
            nodes: (0..n).map(|i| format!("v{i}")).collect(),
            attributes: vec!["x".into()],
            edges: edges
                .iter()
                .map(|&(s, d, w)| (NodeId(s), NodeId(d), AttributeId(0), vec![Level::from(w)]))
                .collect(),
            dimensions: vec![Dimension {
                name: "len".into(),
                rule: CostRule::Additive,
                grid: CostGrid::new((0..=budget).map(Level::from).collect(), Level::from(budget)),
                delta_min: Some(Level::ONE),
            }],
            source: NodeId(0),
            targets: BTreeSet::from([NodeId(target)]),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn single_edge_instance() {
        let inst = tiny(&[(0, 1, 1)], 2, 3, 1);
        let res = run(&inst, &RunConfig::default()).unwrap();
        assert_eq!(res.solutions.len(), 1);
        assert!(res.steps() <= 2);
        assert_ne!(res.termination, Termination::StepLimit);
    }

    #[test]
    fn unreachable_target_exhausts_frontier() {
        let inst = tiny(&[(0, 1, 1)], 3, 3, 2);
        let res = run(&inst, &RunConfig::default()).unwrap();
        assert_eq!(res.termination, Termination::FrontierExhausted);
        assert!(res.solutions.is_empty());
    }

    #[test]
    fn step_limit_stops_early() {
        let inst = running_example();
        let res = run(&inst, &RunConfig { step_limit: Some(1), ..Default::default() }).unwrap();
        assert_eq!(res.termination, Termination::StepLimit);
        assert_eq!(res.steps(), 1);
    }

    #[test]
    fn sparse_certificate_checks_still_terminate() {
        let inst = running_example();
        let res = run(&inst, &RunConfig { cert_period: 2, ..Default::default() }).unwrap();
        assert!(matches!(res.termination, Termination::CertificateHeld | Termination::FrontierExhausted));
        assert!(res.trace.iter().filter(|e| e.step % 2 == 1).all(|e| !e.certificate_held));
    }

    #[test]
    fn invalid_instance_is_rejected() {
        let mut inst = tiny(&[(0, 1, 0)], 2, 3, 1);
        // Zero weight on the only progressive dimension.
        let report = validate_instance(&inst);
        assert!(!report.is_valid());
        assert!(matches!(run(&inst, &RunConfig::default()), Err(EngineError::Invalid(_))));
        inst = tiny(&[(0, 1, 1)], 2, 3, 1);
        assert!(run(&inst, &RunConfig::default()).is_ok());
    }

    #[test]
    fn runtime_bound_on_running_example() {
        let inst = running_example();
        let q = rank_quantization(&inst);
        let res = run(&inst, &RunConfig::default()).unwrap();
        let report = runtime_bound_check(&res, &inst, &q);
        assert_eq!((report.max_out_degree, report.dims, report.bin_count), (2, 3, 30));
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let inst = running_example();
        let a = run(&inst, &RunConfig::default()).unwrap();
        let b = run(&inst, &RunConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
