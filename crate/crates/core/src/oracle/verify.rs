//! Mechanical checks of a finished run against brute-force ground truth.

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::{run, runtime_bound_check, BoundReport, RunConfig, SearchResult, Termination};
use crate::frontier::{layer_width_check, Frontier, PathRecord, WidthViolation};
use crate::instance::{CostVector, Instance, Signature};
use crate::oracle::enumerate::{enumerate_feasible, FeasiblePath, OracleEnumeration};
use crate::oracle::potential::{grid_vectors, Potential, PotentialTable};
use crate::oracle::OracleError;
use crate::quantization::{rank_quantization, BinIndex};

/// Outcome of the dominance-coverage check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub termination: Termination,
    /// Feasible paths compared against the solution set.
    pub checked: usize,
    /// Feasible paths no recorded solution weakly dominates.
    pub counterexamples: Vec<FeasiblePath>,
    /// Recorded solutions absent from the enumeration.
    pub unknown_solutions: Vec<PathRecord>,
}

impl CoverageReport {
    /// Coverage is only claimed for certified runs.
    pub fn applicable(&self) -> bool {
        self.termination == Termination::CertificateHeld
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.unknown_solutions.is_empty()
    }
}

/// Every feasible path is weakly dominated, by cost alone, by some recorded
/// solution. Signatures are not compared.
pub fn verify_dominance_coverage(result: &SearchResult, oracle: &OracleEnumeration) -> CoverageReport {
    let known: BTreeSet<&PathRecord> = oracle.feasible.iter().map(|p| &p.path).collect();
    let unknown_solutions = result
        .solutions
        .iter()
        .filter(|s| !known.contains(&s.path))
        .map(|s| s.path.clone())
        .collect();
    let mut report = CoverageReport {
        termination: result.termination,
        checked: 0,
        counterexamples: Vec::new(),
        unknown_solutions,
    };
    if !report.applicable() {
        return report;
    }
    let found: BTreeSet<(Signature, &CostVector)> = result.solutions.iter().map(|s| (s.sig, &s.cost)).collect();
    for p in &oracle.feasible {
        if found.contains(&(p.sig, &p.cost)) {
            continue;
        }
        report.checked += 1;
        if !result.solutions.iter().any(|s| s.cost.le(&p.cost)) {
            report.counterexamples.push(p.clone());
        }
    }
    report
}

/// Frontier before each extraction, re-running the engine when the result
/// did not keep them. Fails if the replay diverges from the recorded trace.
pub fn snapshots_for(result: &SearchResult, instance: &Instance) -> Result<Vec<Frontier>, OracleError> {
    if result.snapshots.len() == result.trace.len() {
        return Ok(result.snapshots.clone());
    }
    let config = RunConfig {
        record_snapshots: true,
        ..result.config.clone()
    };
    let replay = run(instance, &config)?;
    if replay.trace != result.trace {
        return Err(OracleError::ReplayDiverged);
    }
    Ok(replay.snapshots)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DescentViolationKind {
    /// (i): no skyline entry attains the floor.
    SkylineMissesFloor { h_star: u32, skyline_best: Potential },
    /// (iii): the floor rose inside a phase.
    Increase { from: u32, to: Potential },
    /// (iv): a minimum-potential extraction did not lower the floor.
    NoStrictProgress { h_star: u32, after: Potential },
    /// A drop happened while extracting an entry above the floor.
    DropWithoutMinimum { h_star: u32, extracted: Potential, after: Potential },
    TooManyDescents { phase: usize, descents: u32, lambda: u64 },
    /// Descents through the k-th completion exceed `k * Λ`.
    CumulativeBound { completions: u64, descents: u64, bound: u64 },
    InitialAboveLambda { h_star: u32, lambda: u64 },
    SkylinePotentialAboveLambda { potential: u32, lambda: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentViolation {
    pub step: u64,
    pub kind: DescentViolationKind,
}

/// Steps between two completion events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    pub first_step: u64,
    pub last_step: u64,
    /// Floor before the phase's first extraction.
    pub start: Potential,
    pub descents: u32,
    /// Whether the phase ended by generating a feasible path.
    pub completed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentReport {
    pub lambda: u64,
    /// `h*(t-1)` for step `t`: the floor of the frontier it extracts from.
    pub before: Vec<Potential>,
    /// Floor after step `t`; zero when the step generated a feasible path.
    pub after: Vec<Potential>,
    /// Potential of the extracted entry.
    pub extracted: Vec<Potential>,
    pub phases: Vec<Phase>,
    /// Largest finite potential seen on any skyline.
    pub max_skyline_potential: Option<u32>,
    pub violations: Vec<DescentViolation>,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn initial(&self) -> Option<Potential> {
        self.before.first().copied()
    }

    pub fn total_descents(&self) -> u64 {
        self.phases.iter().map(|p| p.descents as u64).sum()
    }

    /// Values for the trace `h_star` column.
    pub fn h_star_column(&self) -> Vec<Option<u64>> {
        self.after.iter().map(|h| h.finite().map(u64::from)).collect()
    }

    /// Floor sequence of one phase: its start value, then the value after
    /// each of its steps.
    pub fn phase_sequence(&self, phase: usize) -> Vec<Potential> {
        let p = &self.phases[phase];
        let mut seq = vec![p.start];
        seq.extend(&self.after[(p.first_step - 1) as usize..p.last_step as usize]);
        seq
    }
}

fn floor_of<'e>(table: &mut PotentialTable, entries: impl Iterator<Item = &'e crate::frontier::FrontierEntry>) -> Potential {
    entries
        .map(|e| table.get(e.sig, &e.cost))
        .min()
        .unwrap_or(Potential::Infinite)
}

/// Replays the run and checks the potential descent step by step. Phases
/// end at steps that generate a feasible path, duplicates included.
pub fn verify_descent(result: &SearchResult, instance: &Instance) -> Result<DescentReport, OracleError> {
    let snapshots = snapshots_for(result, instance)?;
    let lambda = instance.max_step_count()?;
    let mut table = PotentialTable::new(instance);
    let mut report = DescentReport {
        lambda,
        before: Vec::new(),
        after: Vec::new(),
        extracted: Vec::new(),
        phases: Vec::new(),
        max_skyline_potential: None,
        violations: Vec::new(),
    };
    let violation = |report: &mut DescentReport, step: u64, kind| report.violations.push(DescentViolation { step, kind });

    let mut prev_completions = 0;
    let mut phase: Option<Phase> = None;
    for (i, event) in result.trace.iter().enumerate() {
        let step = event.step;
        let before = floor_of(&mut table, snapshots[i].entries());
        let skyline_best = floor_of(&mut table, snapshots[i].skyline());
        for e in snapshots[i].skyline() {
            if let Potential::Finite(h) = table.get(e.sig, &e.cost) {
                report.max_skyline_potential = Some(report.max_skyline_potential.map_or(h, |m| m.max(h)));
            }
        }
        let extracted = table.get(event.sig, &event.cost);
        let completed = event.completions > prev_completions;
        let next = snapshots.get(i + 1).unwrap_or(&result.final_frontier);
        let after = if completed {
            Potential::Finite(0)
        } else {
            floor_of(&mut table, next.entries())
        };
        if i == 0 {
            if let Potential::Finite(h) = before {
                if h as u64 > lambda {
                    violation(&mut report, step, DescentViolationKind::InitialAboveLambda { h_star: h, lambda });
                }
            }
        }

        let current = phase.get_or_insert(Phase {
            first_step: step,
            last_step: step,
            start: before,
            descents: 0,
            completed: false,
        });
        current.last_step = step;
        if let Potential::Finite(h) = before {
            if skyline_best != before {
                violation(&mut report, step, DescentViolationKind::SkylineMissesFloor { h_star: h, skyline_best });
            }
            if after > before {
                violation(&mut report, step, DescentViolationKind::Increase { from: h, to: after });
            }
            if extracted == before && after >= before {
                violation(&mut report, step, DescentViolationKind::NoStrictProgress { h_star: h, after });
            }
            if after < before {
                if extracted != before {
                    violation(
                        &mut report,
                        step,
                        DescentViolationKind::DropWithoutMinimum { h_star: h, extracted, after },
                    );
                }
                current.descents += 1;
            }
        }
        if completed {
            current.completed = true;
            report.phases.push(phase.take().unwrap());
        }
        report.before.push(before);
        report.after.push(after);
        report.extracted.push(extracted);
        prev_completions = event.completions;
    }
    if let Some(p) = phase.take() {
        report.phases.push(p);
    }

    let mut cumulative = 0u64;
    let mut completions_seen = result.trace.iter().map(|e| (e.step, e.completions)).collect::<Vec<_>>().into_iter();
    for (k, p) in report.phases.clone().iter().enumerate() {
        if p.descents as u64 > lambda {
            violation(
                &mut report,
                p.last_step,
                DescentViolationKind::TooManyDescents { phase: k, descents: p.descents, lambda },
            );
        }
        cumulative += p.descents as u64;
        if p.completed {
            let completions = completions_seen
                .find(|&(s, _)| s == p.last_step)
                .map(|(_, c)| c)
                .unwrap_or(0);
            let bound = completions * lambda;
            if cumulative > bound {
                violation(
                    &mut report,
                    p.last_step,
                    DescentViolationKind::CumulativeBound { completions, descents: cumulative, bound },
                );
            }
        }
    }
    if let Some(h) = report.max_skyline_potential {
        if h as u64 > lambda {
            violation(&mut report, 0, DescentViolationKind::SkylinePotentialAboveLambda { potential: h, lambda });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualViolation {
    pub sig: Signature,
    pub lower: CostVector,
    pub upper: CostVector,
    pub h_lower: Potential,
    pub h_upper: Potential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualBudgetReport {
    pub states: usize,
    /// Covering pairs `(c, c + e_i)` compared. By transitivity these imply
    /// the inequality for every comparable pair.
    pub pairs_checked: usize,
    pub violations: Vec<ResidualViolation>,
}

impl ResidualBudgetReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `H(σ, c) <= H(σ, c')` whenever `c <= c'`, over every reachable signature
/// and every on-grid cost.
pub fn verify_residual_budget(instance: &Instance) -> Result<ResidualBudgetReport, OracleError> {
    let lambda = instance.max_step_count()?;
    if lambda > super::enumerate::DEFAULT_LAMBDA_CAP {
        return Err(OracleError::CapExceeded {
            lambda,
            cap: super::enumerate::DEFAULT_LAMBDA_CAP,
        });
    }
    let mut table = PotentialTable::new(instance);
    let sizes: Vec<u32> = (0..instance.dims()).map(|d| instance.grid(d).len() as u32).collect();
    let costs = grid_vectors(instance);
    let mut report = ResidualBudgetReport {
        states: 0,
        pairs_checked: 0,
        violations: Vec::new(),
    };
    for sig in instance.reachable_signatures() {
        for c in &costs {
            report.states += 1;
            let h = table.get(sig, c);
            for dim in 0..sizes.len() {
                if c.get(dim) + 1 >= sizes[dim] {
                    continue;
                }
                let mut up = c.indices().to_vec();
                up[dim] += 1;
                let up = CostVector::new(up);
                let h_up = table.get(sig, &up);
                report.pairs_checked += 1;
                if h > h_up {
                    report.violations.push(ResidualViolation {
                        sig,
                        lower: c.clone(),
                        upper: up,
                        h_lower: h,
                        h_upper: h_up,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LayerGeometryReport {
    pub snapshots: usize,
    pub max_layers: usize,
    pub max_signature_layer_width: usize,
    pub max_global_layer_width: usize,
    pub bin_count: u64,
    pub violations: Vec<(u64, WidthViolation)>,
}

impl LayerGeometryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Layer contiguity, bin exclusivity and width bounds on every snapshot,
/// plus the final frontier.
pub fn verify_layer_geometry(result: &SearchResult, instance: &Instance) -> Result<LayerGeometryReport, OracleError> {
    let q = rank_quantization(instance);
    let snapshots = snapshots_for(result, instance)?;
    let mut report = LayerGeometryReport {
        bin_count: q.bin_count(),
        ..Default::default()
    };
    for (i, frontier) in snapshots.iter().chain(std::iter::once(&result.final_frontier)).enumerate() {
        report.snapshots += 1;
        match layer_width_check(frontier, &q) {
            Ok(w) => {
                report.max_layers = report.max_layers.max(w.layers);
                report.max_signature_layer_width = report.max_signature_layer_width.max(w.max_signature_layer_width);
                report.max_global_layer_width = report.max_global_layer_width.max(w.max_global_layer_width);
            }
            Err(v) => report.violations.push((i as u64 + 1, v)),
        }
    }
    Ok(report)
}

/// Bookkeeping invariants of a run: solution replay, monotone counters,
/// skyline-only extraction and the coverage preference.
pub fn verify_run_invariants(result: &SearchResult, instance: &Instance) -> Result<Vec<String>, OracleError> {
    let mut issues = Vec::new();
    for s in &result.solutions {
        match instance.replay(s.path.edges()) {
            Some((sig, cost)) if sig == s.sig && cost == s.cost => {}
            other => issues.push(format!(
                "solution found at step {} replays to {:?}",
                s.discovered_at_step, other
            )),
        }
        if s.path.is_empty() || !instance.is_target(s.sig.node) {
            issues.push(format!("solution found at step {} does not end at a target", s.discovered_at_step));
        }
    }
    let q = rank_quantization(instance);
    let snapshots = snapshots_for(result, instance)?;
    let mut covered: BTreeSet<BinIndex> = BTreeSet::new();
    let mut prev: Option<&crate::engine::TraceEvent> = None;
    for (i, e) in result.trace.iter().enumerate() {
        if let Some(p) = prev {
            if e.step <= p.step {
                issues.push(format!("step {} does not follow step {}", e.step, p.step));
            }
            if e.solutions_count < p.solutions_count || e.covered_bins < p.covered_bins {
                issues.push(format!("step {}: counters decreased", e.step));
            }
        }
        let skyline: Vec<_> = snapshots[i].skyline().collect();
        if !skyline.iter().any(|x| x.sig == e.sig && x.cost == e.cost) {
            issues.push(format!("step {}: extracted entry was not on the skyline", e.step));
        }
        let uncovered = skyline.iter().any(|x| !covered.contains(&q.bin_index(&x.cost)));
        if uncovered && covered.contains(&e.bin) {
            issues.push(format!("step {}: an uncovered bin was available but a covered one was taken", e.step));
        }
        covered.insert(e.bin.clone());
        if covered.len() != e.covered_bins {
            issues.push(format!("step {}: covered_bins is {}, expected {}", e.step, e.covered_bins, covered.len()));
        }
        prev = Some(e);
    }
    Ok(issues)
}

/// Every check on one instance and one run.
#[derive(Clone, Debug)]
pub struct VerificationSummary {
    pub result: SearchResult,
    pub feasible_paths: usize,
    pub coverage: CoverageReport,
    pub descent: DescentReport,
    pub residual: ResidualBudgetReport,
    pub layers: LayerGeometryReport,
    pub invariants: Vec<String>,
    pub bound: BoundReport,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        (!self.coverage.applicable() || self.coverage.passed())
            && self.coverage.unknown_solutions.is_empty()
            && self.descent.passed()
            && self.residual.passed()
            && self.layers.passed()
            && self.invariants.is_empty()
            && self.bound.holds()
    }
}

impl fmt::Display for VerificationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(
            f,
            "termination: {} after {} steps, {} solutions, {} feasible paths",
            self.result.termination,
            self.result.steps(),
            self.result.solutions.len(),
            self.feasible_paths
        )?;
        if self.coverage.applicable() {
            writeln!(
                f,
                "coverage: {} ({} undiscovered paths checked, {} counterexamples)",
                mark(self.coverage.passed()),
                self.coverage.checked,
                self.coverage.counterexamples.len()
            )?;
        } else {
            writeln!(f, "coverage: not applicable ({})", self.coverage.termination)?;
        }
        writeln!(
            f,
            "descent: {} ({} phases, {} descents, Λ = {}, {} violations)",
            mark(self.descent.passed()),
            self.descent.phases.len(),
            self.descent.total_descents(),
            self.descent.lambda,
            self.descent.violations.len()
        )?;
        writeln!(
            f,
            "residual budget: {} ({} states, {} pairs)",
            mark(self.residual.passed()),
            self.residual.states,
            self.residual.pairs_checked
        )?;
        writeln!(
            f,
            "layer geometry: {} ({} snapshots, widest signature layer {} of B* = {})",
            mark(self.layers.passed()),
            self.layers.snapshots,
            self.layers.max_signature_layer_width,
            self.layers.bin_count
        )?;
        writeln!(f, "run invariants: {} ({} issues)", mark(self.invariants.is_empty()), self.invariants.len())?;
        write!(
            f,
            "runtime bound: {} ({} <= {} * {} * {} * {} * {} = {})",
            mark(self.bound.holds()),
            self.bound.measured,
            self.bound.constant,
            self.bound.steps,
            self.bound.max_out_degree.max(1),
            self.bound.peak_width,
            self.bound.dims,
            self.bound.bound
        )
    }
}

pub fn verify_instance(instance: &Instance, config: &RunConfig) -> Result<VerificationSummary, OracleError> {
    let oracle = enumerate_feasible(instance)?;
    let result = run(
        instance,
        &RunConfig {
            record_snapshots: true,
            ..config.clone()
        },
    )?;
    let coverage = verify_dominance_coverage(&result, &oracle);
    let descent = verify_descent(&result, instance)?;
    let residual = verify_residual_budget(instance)?;
    let layers = verify_layer_geometry(&result, instance)?;
    let invariants = verify_run_invariants(&result, instance)?;
    let bound = runtime_bound_check(&result, instance, &rank_quantization(instance));
    Ok(VerificationSummary {
        feasible_paths: oracle.feasible.len(),
        result,
        coverage,
        descent,
        residual,
        layers,
        invariants,
        bound,
    })
}
