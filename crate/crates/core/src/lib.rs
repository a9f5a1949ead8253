//! Halpern-anchored stochastic methods for minimizing the expectation of
//! convex functions over the common fixed points of firmly nonexpansive
//! mappings in `R^d`.
//!
//! The crate is organised bottom-up:
//!
//! * [`point`]: the dense iterate type.
//! * [`operators`]: ball projections and the composite mapping whose fixed
//!   point set is the generalized convex feasible set of a family of balls.
//! * [`functions`]: diagonal quadratics and weighted `l1` distances with
//!   gradients, subgradients and closed-form proximity operators.
//! * [`schedules`]: power-law step sizes and their admissibility test.
//! * [`samplers`]: the index sequences driving the stochastic choice of
//!   component (i.i.d., greedy, shuffled cycles, Markov chain).
//! * [`solver`]: the gradient and proximal Halpern engines plus metrics.
//! * [`harness`]: random instance generation, seeded ensembles, CSV and
//!   table output used by the `halpern` binary.

pub mod error;
pub mod functions;
pub mod harness;
pub mod operators;
pub mod point;
pub mod samplers;
pub mod schedules;
pub mod solver;

pub use error::{Error, Result};
pub use functions::{ConvexFunction, ObjectiveKind};
pub use operators::{Ball, OperatorExpr};
pub use point::Point;
pub use samplers::{Sampler, SamplerKind, SamplerSpec};
pub use schedules::{Algorithm, ScheduleViolation, StepSchedule, StepSizes, ValidSchedule};
pub use solver::{
    Component, ProblemInstance, RunOptions, RunTrace, SolverState, StepOutcome, StoppingRule,
};
