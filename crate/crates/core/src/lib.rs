//! Solver core for the multi-vehicle pickup-and-delivery problem with time
//! windows (m-PDPTW).
//!
//! A fleet of capacitated vehicles starts and ends at a single depot and must
//! move goods from supplier nodes (positive quantity) to client nodes
//! (negative quantity) under time windows and supplier-before-client
//! precedence links. Nodes may be visited several times, so large quantities
//! can be split across visits. Candidate plans are scored on three criteria:
//! vehicles used, total tardiness, and transport cost, combined by a weighted
//! sum while a Pareto archive keeps the non-dominated trade-offs.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature for embedded or wasm use. IO, file handling, and the command
//! line live in the companion `pdptw-cli` crate.
//!
//! Modules follow the pipeline:
//!
//! * [`model`] — instance data, the instance file format, geometry, and
//!   precedence derivation.
//! * [`evaluation`] — replay of a candidate solution: times, loads, transfers,
//!   objective vector, and constraint verdicts.
//! * [`moo`] — Pareto dominance, the non-dominated archive, and weighted
//!   aggregation.
//! * [`ga`] — the genetic solver: construction, variation, repair, evolution.
//! * [`oracle`] — exhaustive ground truth for desk-size instances.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod evaluation;
pub mod ga;
pub mod model;
pub mod moo;
pub mod oracle;

#[cfg(feature = "testgen")]
pub mod testgen;

pub use evaluation::{
    objective_vector, validate, ObjectiveVector, Scorer, Solution, ValidationReport,
};
pub use ga::{evolve, repair, Chromosome, FitnessEvaluator, GaConfig, SolveError, SolveResult};
pub use model::{parse_instance, Instance, Node, NodeId, VehicleId, VehicleSpec};
pub use moo::{aggregate, dominates, ParetoArchive, Weights};
pub use oracle::{exhaustive_best, OracleLimits, OracleOutcome};
