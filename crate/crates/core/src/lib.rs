//! Optimal linear payment plans for fog-computing resource rental.
//!
//! A network operator rents heterogeneous resources (bandwidth, CPU,
//! proximity, ...) from a fog node, observing only a noisy QoS signal of what
//! was actually provided. This crate solves the operator's contract design
//! problem in closed form, cross-checks the result against an independent
//! numeric optimizer, simulates noisy payoffs with seeded Monte Carlo, and
//! runs the parameter sweeps and six-plan comparisons used to study the
//! market.
//!
//! Module map:
//! - [`matrix`]: small dense symmetric/general matrix utilities.
//! - [`market`]: instance data and utility/certainty-equivalent evaluators.
//! - [`solver`]: closed-form plans, the gradient-ascent oracle, sensitivities.
//! - [`sim`]: seeded simulation of noisy QoS outcomes and CARA utilities.
//! - [`experiments`]: sweeps, plan rankings, CSV emission.
//! - [`scenario`]: mapping raw resource descriptors to effort dimensions.

pub mod error;
pub mod experiments;
pub mod fmt;
pub mod market;
pub mod matrix;
pub mod scenario;
pub mod sim;
pub mod solver;
pub mod testing;

pub use error::{Error, Result};
pub use experiments::{EvaluationMode, SweepParameter, SweepResult, SweepRow, SweepSpec};
pub use market::{Contract, EffortVector, MarketInstance};
pub use matrix::{Matrix, SymMatrix};
pub use scenario::ResourceProfile;
pub use sim::{SimConfig, SimResult};
pub use solver::{BonusDim, InstanceParam, PlanKind, SolveReport};
