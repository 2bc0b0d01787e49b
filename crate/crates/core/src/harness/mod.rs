//! Configuration, refinement studies, probes and report output.
//!
//! The study checks behaviour along the whole sequence `h → 0`. Interior
//! convergence results for monotone schemes are stated for subsequences in
//! general; for the problems used here the limit is unique, so the full
//! sequence is expected to converge and that is what the tables show.

mod config;
mod expr;
mod probes;
mod selftest;
mod study;

pub use config::{ProblemSpec, RunConfig, StudyOptions};
pub use expr::Expr;
pub use probes::{
    boundary_adherence_probe, convexity_of_limit_probe, AdherenceReport, ConvexityLevel, ConvexityProbeReport, ShellRow,
};
pub use selftest::{selftest, Check, SelftestReport};
pub use study::{
    observed_order, run_refinement_study, write_atomic, AbpSummary, Level, LevelRecord, MassGate, StudyOutput,
    StudyReport,
};
