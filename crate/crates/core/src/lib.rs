//! Multi-criteria graph traversal scheduled by Pareto-skyline geometry.
//!
//! Paths carry a cost vector on a finite grid and a signature (node plus a
//! Markov context). The engine keeps a deduplicated frontier, extracts only
//! from its skyline with a bin-coverage tie-break, and stops as soon as every
//! skyline entry is covered by a discovered solution within one minimum
//! increment. The [`oracle`] module checks those claims by brute force on
//! small instances.
//!
//! ```
//! use skyline_search::{fixtures::running_example, run, RunConfig, Termination};
//!
//! let instance = running_example();
//! let result = run(&instance, &RunConfig::default()).unwrap();
//! assert_eq!(result.termination, Termination::CertificateHeld);
//! assert_eq!(result.solutions.len(), 2);
//! ```

pub mod engine;
pub mod fixtures;
pub mod frontier;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod quantization;
pub mod scheduler;

pub use engine::{certificate_holds, run, runtime_bound_check, RunConfig, SearchResult, Termination};
pub use frontier::{Frontier, FrontierEntry, PathRecord};
pub use instance::{validate_instance, CostVector, Instance, Level, Signature};
pub use quantization::{rank_quantization, Quantization};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/cost_model.md")]
    pub mod cost_model {}
    #[doc = include_str!("../../../book/src/dominance.md")]
    pub mod dominance {}
    #[doc = include_str!("../../../book/src/quantization.md")]
    pub mod quantization {}
    #[doc = include_str!("../../../book/src/skyline_first.md")]
    pub mod skyline_first {}
    #[doc = include_str!("../../../book/src/certificate.md")]
    pub mod certificate {}
    #[doc = include_str!("../../../book/src/potential.md")]
    pub mod potential {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub mod oracle {}
    #[doc = include_str!("../../../book/src/file_formats.md")]
    pub mod file_formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
