//! Verification and solving toolkit for relational fixed-point problems in
//! b-metric spaces.
//!
//! A problem instance is a finite b-metric space, a binary relation on its
//! points, a self-map, a nonnegative potential and a simulation function.
//! The crate checks the hypotheses of the relational Caristi-Banach
//! fixed-point theorems on such an instance ([`contraction`]), runs the
//! relation-preserving Picard iteration with its proof diagnostics
//! ([`solver`]) and cross-checks the outcome against an exhaustive oracle.

pub mod contraction;
pub mod error;
pub mod generate;
pub mod par;
pub mod problem;
pub mod relation;
pub mod report;
pub mod samples;
pub mod simulation;
pub mod solver;
pub mod space;

pub use contraction::{
    compute_mfr, verify_all_hypotheses, verify_contraction, verify_uniqueness_condition, ContractionProblem,
    HypothesisReport, Potential, SelfMap,
};
pub use error::{Error, Result};
pub use par::Strategy;
pub use problem::{parse_problem, ProblemFile};
pub use relation::{find_path, BinaryRelation, Path};
pub use report::{run_command, Command, Report, RunOptions};
pub use simulation::{check_b_simulation_inequality, check_zeta_axioms, SimulationFunction};
pub use solver::{certify, enumerate_fixed_points, picard_iterate, ratio_diagnostics, IterationTrace, SolverOptions};
pub use space::{verify_bmetric_axioms, BMetricSpace, Metric, PointId};
