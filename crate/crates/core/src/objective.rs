//! Objective evaluation.
//!
//! Two conventions are supported. The canonical objective weighs preference by
//! (1−λ) and realized social utility by λ. The unit-sum objective is the plain
//! sum of preference and both directions of realized social utility; for λ = ½
//! it is exactly twice the canonical value. The two are computed along
//! different routes (per user-item versus per edge-slot) so that each can act
//! as a check on the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AssignmentRows, Configuration, Instance, RawAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    Canonical,
    UnitSum,
}

impl std::str::FromStr for ObjectiveMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "canonical" => Ok(ObjectiveMode::Canonical),
            "unit_sum" | "unit-sum" => Ok(ObjectiveMode::UnitSum),
            other => Err(format!("unknown objective mode `{other}`")),
        }
    }
}

/// Raw preference and social sums of a configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParts {
    /// Σ p(u, c) over displayed items.
    pub preference: f64,
    /// Σ τ(u, v, c) over realized (u, v, c) co-displays, both directions.
    pub social: f64,
}

impl ObjectiveParts {
    pub fn canonical(&self, lambda: f64) -> f64 {
        (1.0 - lambda) * self.preference + lambda * self.social
    }

    pub fn unit_sum(&self) -> f64 {
        self.preference + self.social
    }

    pub fn value(&self, lambda: f64, mode: ObjectiveMode) -> f64 {
        match mode {
            ObjectiveMode::Canonical => self.canonical(lambda),
            ObjectiveMode::UnitSum => self.unit_sum(),
        }
    }
}

/// Slot at which `c` appears in `row`, if any.
#[inline]
fn slot_of(row: &[usize], c: usize) -> Option<usize> {
    row.iter().position(|&x| x == c)
}

fn check_dims<A: AssignmentRows + ?Sized>(inst: &Instance, config: &A) -> Result<()> {
    let rows = config.rows();
    if rows.len() != inst.n() || rows.iter().any(|r| r.len() != inst.k()) {
        return Err(Error::Dimension(format!(
            "assignment is not {}x{}",
            inst.n(),
            inst.k()
        )));
    }
    Ok(())
}

/// w_A(u, c): (1−λ)·p(u,c) + λ·Σ τ(u,v,c) over friends v co-displayed `c` with `u`.
pub fn savg_utility(inst: &Instance, config: &Configuration, u: usize, c: usize) -> Result<f64> {
    check_dims(inst, config)?;
    let rows = config.rows();
    let s = slot_of(&rows[u], c)
        .ok_or_else(|| Error::Domain(format!("item {c} is not displayed to user {u}")))?;
    let social: f64 = inst
        .neighbors(u)
        .iter()
        .filter(|&&(v, _)| rows[v][s] == c)
        .map(|&(_, e)| inst.edges()[e].tau_from(u, c))
        .sum();
    Ok((1.0 - inst.lambda()) * inst.pref(u, c) + inst.lambda() * social)
}

/// Total SAVG utility of a feasible configuration.
pub fn total_objective(inst: &Instance, config: &Configuration, mode: ObjectiveMode) -> Result<f64> {
    check_dims(inst, config)?;
    match mode {
        ObjectiveMode::Canonical => {
            let mut total = 0.0;
            for (u, row) in config.rows().iter().enumerate() {
                for &c in row {
                    total += savg_utility(inst, config, u, c)?;
                }
            }
            Ok(total)
        }
        ObjectiveMode::UnitSum => Ok(unit_sum_by_edges(inst, config.rows())),
    }
}

fn unit_sum_by_edges(inst: &Instance, rows: &[Vec<usize>]) -> f64 {
    let mut total: f64 = rows
        .iter()
        .enumerate()
        .map(|(u, row)| row.iter().map(|&c| inst.pref(u, c)).sum::<f64>())
        .sum();
    for e in inst.edges() {
        for s in 0..inst.k() {
            let c = rows[e.u][s];
            if c == rows[e.v][s] {
                total += e.weight(c);
            }
        }
    }
    total
}

/// Preference and social sums, per displayed cell and per co-displayed edge-slot.
///
/// Also defined for infeasible raw assignments, where a duplicated item
/// contributes once per cell.
pub fn objective_parts<A: AssignmentRows + ?Sized>(inst: &Instance, config: &A) -> Result<ObjectiveParts> {
    check_dims(inst, config)?;
    let rows = config.rows();
    let mut parts = ObjectiveParts::default();
    for (u, row) in rows.iter().enumerate() {
        for &c in row {
            if c >= inst.m() {
                return Err(Error::Domain(format!("item {c} out of range")));
            }
            parts.preference += inst.pref(u, c);
        }
    }
    for e in inst.edges() {
        for s in 0..inst.k() {
            let c = rows[e.u][s];
            if c == rows[e.v][s] {
                parts.social += e.weight(c);
            }
        }
    }
    Ok(parts)
}

/// Objective of an unrepaired assignment (independent rounding output).
pub fn raw_objective(inst: &Instance, raw: &RawAssignment, mode: ObjectiveMode) -> Result<f64> {
    Ok(objective_parts(inst, raw)?.value(inst.lambda(), mode))
}

/// Copy of `inst` with p'(u,c) = ((1−λ)/λ)·p(u,c) and λ = ½.
///
/// The canonical objective of the original equals λ times the unit-sum
/// objective of the scaled instance for every configuration.
pub fn scale_preferences(inst: &Instance) -> Result<Instance> {
    let lambda = inst.lambda();
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let factor = (1.0 - lambda) / lambda;
    let pref = inst
        .pref_rows()
        .iter()
        .map(|row| row.iter().map(|&p| factor * p).collect())
        .collect();
    inst.clone().with_pref(pref).with_lambda(0.5)
}

/// Social sums of a configuration under the teleportation model.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StParts {
    pub preference: f64,
    pub direct: f64,
    pub indirect: f64,
}

pub fn st_parts(inst: &Instance, config: &Configuration) -> Result<StParts> {
    check_dims(inst, config)?;
    let rows = config.rows();
    let mut parts = StParts::default();
    for (u, row) in rows.iter().enumerate() {
        parts.preference += row.iter().map(|&c| inst.pref(u, c)).sum::<f64>();
    }
    for e in inst.edges() {
        for (s, &c) in rows[e.u].iter().enumerate() {
            match slot_of(&rows[e.v], c) {
                Some(s2) if s2 == s => parts.direct += e.weight(c),
                Some(_) => parts.indirect += e.weight(c),
                None => {}
            }
        }
    }
    Ok(parts)
}

/// Total SAVG utility with indirect co-display (canonical weighting).
pub fn st_objective(inst: &Instance, config: &Configuration) -> Result<f64> {
    st_objective_mode(inst, config, ObjectiveMode::Canonical)
}

pub fn st_objective_mode(inst: &Instance, config: &Configuration, mode: ObjectiveMode) -> Result<f64> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    check_dims(inst, config)?;
    let rows = config.rows();
    let lambda = inst.lambda();
    let mut total = 0.0;
    // Per user-item route: w'_A(u, c).
    for (u, row) in rows.iter().enumerate() {
        for (s, &c) in row.iter().enumerate() {
            let mut social = 0.0;
            for &(v, e) in inst.neighbors(u) {
                match slot_of(&rows[v], c) {
                    Some(s2) if s2 == s => social += inst.edges()[e].tau_from(u, c),
                    Some(_) => social += st.d_tel * inst.edges()[e].tau_from(u, c),
                    None => {}
                }
            }
            total += match mode {
                ObjectiveMode::Canonical => (1.0 - lambda) * inst.pref(u, c) + lambda * social,
                ObjectiveMode::UnitSum => inst.pref(u, c) + social,
            };
        }
    }
    Ok(total)
}
