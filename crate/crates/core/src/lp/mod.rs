//! Linear relaxations, a built-in simplex, and LP file interchange.

mod build;
mod format;
mod fractional;
mod model;
mod simplex;

pub use build::{build_full_lp, build_simplified_lp, build_st_lp};
pub use format::{export_model, parse_lp};
pub use fractional::{expand_solution, FractionalSolution};
pub use model::{Constraint, LpModel, Sense, Variable};
pub use simplex::{solve_lp, LpResult, LpStatus, ITERATION_LIMIT};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::objective::scale_preferences;

/// Optimal relaxation of an instance, in the unit-sum convention of the scaled instance.
#[derive(Debug, Clone)]
pub struct Relaxation {
    /// OPT_LP of the preference-scaled instance.
    pub unit_bound: f64,
    /// The same bound in the canonical (λ-weighted) convention.
    pub canonical_bound: f64,
    pub frac: FractionalSolution,
}

fn require_optimal(result: LpResult) -> Result<LpResult> {
    if result.is_optimal() {
        Ok(result)
    } else {
        Err(Error::Lp(format!("relaxation ended with status {:?}", result.status)))
    }
}

/// Scales preferences if λ ≠ ½, solves the compact relaxation and expands it per slot.
pub fn solve_relaxation(inst: &Instance) -> Result<Relaxation> {
    let scaled = scale_preferences(inst)?;
    let result = require_optimal(solve_lp(&build_simplified_lp(&scaled))?)?;
    let frac = expand_solution(&result, &scaled)?;
    Ok(Relaxation { unit_bound: result.objective, canonical_bound: inst.lambda() * result.objective, frac })
}

/// Solves the teleportation relaxation (with size cuts) on the scaled instance.
pub fn solve_st_relaxation(inst: &Instance) -> Result<Relaxation> {
    let scaled = scale_preferences(inst)?;
    let result = require_optimal(solve_lp(&build_st_lp(&scaled)?)?)?;
    let frac = FractionalSolution::from_full(&result, &scaled)?;
    Ok(Relaxation { unit_bound: result.objective, canonical_bound: inst.lambda() * result.objective, frac })
}
