//! Brute-force ground truth for small instances: exhaustive path
//! enumeration, offline completion potentials, run verification and a seeded
//! instance generator.

mod enumerate;
mod generate;
mod potential;
mod verify;

use thiserror::Error;

use crate::engine::EngineError;
use crate::instance::InstanceError;

pub use enumerate::{enumerate_feasible, enumerate_feasible_with_cap, FeasiblePath, OracleEnumeration, DEFAULT_LAMBDA_CAP};
pub use generate::{generate_random_instance, GenParams};
pub use potential::{completion_potential, grid_vectors, Potential, PotentialTable};
pub use verify::{
    snapshots_for, verify_descent, verify_dominance_coverage, verify_instance, verify_layer_geometry,
    verify_residual_budget, verify_run_invariants, CoverageReport, DescentReport, DescentViolation,
    DescentViolationKind, LayerGeometryReport, Phase, ResidualBudgetReport, ResidualViolation, VerificationSummary,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("step bound {lambda} exceeds the oracle cap {cap}")]
    CapExceeded { lambda: u64, cap: u64 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("replayed run diverged from the recorded trace")]
    ReplayDiverged,
    #[error("seed {seed}: no valid instance with a feasible path after {attempts} attempts")]
    RejectionBudget { seed: u64, attempts: u32 },
}
