//! Privacy-aware partitioning of a sensitive dataset across `k`
//! non-colluding adversaries.
//!
//! Every entry goes to between 1 and `t` adversaries. Properties that no
//! single entry reveals, but that become inferable once enough of their
//! supporting entries reach the same adversary, form a dependency
//! hypergraph. The solvers trade the utility of sharing against the
//! worst-adversary disclosure of those properties:
//!
//! ```text
//! maximize  u(S) + λ (τ_I − f(S))    subject to  1 ≤ |A_d| ≤ t  for all d
//! ```
//!
//! * [`heuristics`]: randomized baseline, greedy and GRASP construction
//!   (global or myopic) followed by one local-search pass.
//! * [`exact`]: branch and bound for small instances.
//! * [`relaxation`]: LP relaxation for step and linear disclosure, with
//!   randomized rounding and repair.
//! * [`synth`] and [`geodata`]: instance generators.
//! * [`experiment`]: seeded benchmark runs and reports; [`verify`]: solver
//!   cross-checks.

pub mod assignment;
pub mod disclosure;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod geodata;
pub mod heuristics;
pub mod instance;
pub mod objective;
pub mod relaxation;
pub mod state;
pub mod synth;
pub mod utility;
pub mod verify;

pub use assignment::{apply_move, Assignment, Move};
pub use disclosure::{aggregate_disclosure, DisclosureVector};
pub use error::{Error, Result};
pub use heuristics::{solve, SearchParams, SolveResult};

pub use instance::{
    validate_instance, Aggregation, DisclosureFamily, DisclosureModel, Instance, RawInstance,
};
pub use objective::{tradeoff_objective, ObjectiveValue};
