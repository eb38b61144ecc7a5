//! Online chasing of half-space requests with the Steiner point of the
//! work function's sublevel body.
//!
//! The layers build on each other:
//!
//! * [`geometry`]: vectors, half-spaces, projections, sphere sampling.
//! * [`trajectory`]: the chain-structured cone programs behind the work function.
//! * [`work_function`]: evaluation, minimization and support of `{w_t <= budget}`.
//! * [`steiner`]: Monte-Carlo and quadrature Steiner points from support oracles.
//! * [`chaser`]: the online algorithms and a greedy baseline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaser;
mod error;
pub mod geometry;
mod linalg;
pub mod steiner;
pub mod trajectory;
pub mod work_function;

pub use chaser::{ChaserConfig, ChaserState, PhaseRule, StepOutcome};
pub use error::{Error, Result};
pub use geometry::{Ball, HalfSpace, Vector};
pub use trajectory::{SolveResult, SolveStatus, SolverOptions, SupportProblem, SupportSession, TrajectoryProblem};
pub use work_function::{FnSupport, OmegaSupport, SupportFunction, WorkFunctionOracle};
pub use steiner::{estimate_steiner, estimate_steiner_with, quadrature_steiner_2d, SteinerEstimate, SteinerQuery};
