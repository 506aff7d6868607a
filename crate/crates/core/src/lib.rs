//! Social abstract argumentation under the simple product semantics.
//!
//! A framework is a set of arguments, an attack relation and pro/con vote
//! counts per argument. A social model assigns every argument a value in
//! `[0, 1]` equal to its vote support discounted by the aggregated strength
//! of its attackers. This crate computes such models, searches for all of
//! them, certifies uniqueness where a sufficient condition holds and runs
//! the normalisation and ordinal independence experiments.

pub mod analysis;
pub mod cli;
pub mod enumeration;
pub mod fixtures;
pub mod framework;
pub mod io;
pub mod semantics;
pub mod solver;
pub mod testing;

pub use analysis::{
    certify_uniqueness, independence_experiment, normalized_solve, solve_three_clique, IndependenceReport,
    NormalizedSolution, SolveMode, UniquenessCertificate,
};
pub use enumeration::{enumerate_models, grid_oracle, rankings_of, EnumerationConfig, ModelSet, Ranking};
pub use framework::{ArgumentId, FrameworkError, SocialFramework, VoteRecord};
pub use semantics::{evaluate_rhs, residual, tau, SemanticsConfig, Valuation};
pub use solver::{jacobian, picard_step, solve, SolveOutcome, SolverConfig, SolverError};
