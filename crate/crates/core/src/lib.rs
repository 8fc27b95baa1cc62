//! Maximum-weight independent set via smoothed dual coordinate descent over
//! clique cover relaxations.
//!
//! The pipeline drops non-positive-cost nodes, adds one slack per clique,
//! warm-starts with a non-smooth coordinate sweep, and then runs entropy
//! smoothed clique normalization with a decreasing temperature. Bounds come
//! from the dual; feasible fractional points come from a truncation
//! projection; integer solutions come from greedy generation fused through
//! a min-cut recombination.

pub mod bench;
pub mod dual;
pub mod error;
pub mod flow;
pub mod generate;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod primal;
pub mod scheduling;
pub mod solver;
pub mod sparsify;

pub use error::{MwisError, ParseError, Result};
pub use instance::{AugmentedInstance, ProblemInstance, ValidationReport, Violation};
pub use primal::IntegerSolution;
pub use scheduling::{PrimalEstimate, ScheduleConfig};
pub use solver::{
    solve, Mode, RunConfig, Scheduler, SolveOutcome, Status, TraceRecord, Truncation,
};
