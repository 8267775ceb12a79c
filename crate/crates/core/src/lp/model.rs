use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    maximize: bool,
    vars: Vec<Variable>,
    index: HashMap<String, usize>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn maximize() -> Self {
        LpModel { maximize: true, ..Default::default() }
    }

    pub fn minimize() -> Self {
        LpModel { maximize: false, ..Default::default() }
    }

    pub fn is_maximize(&self) -> bool {
        self.maximize
    }

    /// Registers a continuous column; panics on a duplicate name or inverted bounds.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.try_add_var(name, lower, upper).expect("valid variable")
    }

    pub fn try_add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<usize> {
        let name = name.into();
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(Error::Lp(format!("variable {name} has bounds [{lower}, {upper}]")));
        }
        if self.index.contains_key(&name) {
            return Err(Error::Lp(format!("variable {name} registered twice")));
        }
        let j = self.vars.len();
        self.index.insert(name.clone(), j);
        self.vars.push(Variable { name, lower, upper, integer: false });
        self.objective.push(0.0);
        Ok(j)
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.objective[var] = coef;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.vars[var].lower = lower;
        self.vars[var].upper = upper;
    }

    pub fn set_integer(&mut self, var: usize, integer: bool) {
        self.vars[var].integer = integer;
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let name = name.into();
        debug_assert!(coefs.iter().all(|&(j, _)| j < self.vars.len()), "constraint {name} references unknown column");
        self.constraints.push(Constraint { name, coefs, sense, rhs });
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn has_integrality(&self) -> bool {
        self.vars.iter().any(|v| v.integer)
    }

    /// Copy with every integrality flag cleared.
    pub fn relaxed(&self) -> LpModel {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.integer = false;
        }
        out
    }

    /// Copy with every column flagged integer.
    pub fn with_all_integer(&self) -> LpModel {
        let mut out = self.clone();
        for v in &mut out.vars {
            v.integer = true;
        }
        out
    }

    /// cᵀx for a full column vector.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any row or bound by `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coefs.iter().map(|&(j, a)| a * values[j]).sum();
            let gap = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}
