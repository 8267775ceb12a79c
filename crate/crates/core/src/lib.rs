//! Solvers for social-aware group item configuration.
//!
//! Every user of a shopping group is shown k items, one per display slot.
//! Showing friends the same item at the same slot lets them enjoy it together.
//! The crate models instances and configurations, evaluates objectives and
//! metrics, solves the linear relaxation, rounds it with subgroup formation
//! (randomized and deterministic), and provides baselines plus an exact
//! oracle for small instances.

pub mod baselines;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod rng;
pub mod rounding;

pub use error::{Error, Result};
pub use lp::{FractionalSolution, LpModel, LpResult, LpStatus};
pub use metrics::{metrics, MetricsReport};
pub use model::{validate, AssignmentRows, Configuration, Edge, Instance, RawAssignment, StParams};
pub use objective::{scale_preferences, st_objective, total_objective, ObjectiveMode};
pub use rounding::{FocalParams, RoundingOutcome, Sampler};
