use serde::{Deserialize, Serialize};

use super::simplex::LpResult;
use crate::error::{Error, Result};
use crate::model::Instance;

const SUM_TOL: f64 = 1e-6;

/// Per-slot utility factors x[u][c][s], stored flat in (u, c, s) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<f64>>>", into = "Vec<Vec<Vec<f64>>>")]
pub struct FractionalSolution {
    n: usize,
    m: usize,
    k: usize,
    x: Vec<f64>,
}

impl TryFrom<Vec<Vec<Vec<f64>>>> for FractionalSolution {
    type Error = Error;
    fn try_from(nested: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::from_nested(nested)
    }
}

impl From<FractionalSolution> for Vec<Vec<Vec<f64>>> {
    fn from(f: FractionalSolution) -> Self {
        f.to_nested()
    }
}

impl FractionalSolution {
    /// Builds from an n×m×k nested array and checks the sum invariants.
    pub fn from_nested(nested: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = nested.len();
        let m = nested.first().map_or(0, |r| r.len());
        let k = nested.first().and_then(|r| r.first()).map_or(0, |r| r.len());
        let mut x = Vec::with_capacity(n * m * k);
        for (u, row) in nested.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension(format!("fractional row {u} has {} items, expected {m}", row.len())));
            }
            for (c, slots) in row.iter().enumerate() {
                if slots.len() != k {
                    return Err(Error::Dimension(format!(
                        "fractional entry ({u},{c}) has {} slots, expected {k}",
                        slots.len()
                    )));
                }
                x.extend_from_slice(slots);
            }
        }
        let sol = FractionalSolution { n, m, k, x };
        sol.check_invariants()?;
        Ok(sol)
    }

    /// The spread-out solution x ≡ 1/m.
    pub fn uniform(inst: &Instance) -> Self {
        let (n, m, k) = (inst.n(), inst.m(), inst.k());
        FractionalSolution { n, m, k, x: vec![1.0 / m as f64; n * m * k] }
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|u| (0..self.m).map(|c| (0..self.k).map(|s| self.get(u, c, s)).collect()).collect())
            .collect()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.k)
    }

    #[inline]
    pub fn get(&self, u: usize, c: usize, s: usize) -> f64 {
        self.x[(u * self.m + c) * self.k + s]
    }

    #[inline]
    pub(crate) fn set(&mut self, u: usize, c: usize, s: usize, value: f64) {
        let idx = (u * self.m + c) * self.k + s;
        self.x[idx] = value;
    }

    /// Errors unless the tensor's shape matches the instance.
    pub fn check_dims(&self, inst: &Instance) -> Result<()> {
        if self.dims() != (inst.n(), inst.m(), inst.k()) {
            return Err(Error::Dimension(format!(
                "fractional solution is {:?}, instance is {:?}",
                self.dims(),
                (inst.n(), inst.m(), inst.k())
            )));
        }
        Ok(())
    }

    /// Entries in [0,1], Σ_c x = 1 per (u,s) and Σ_s x ≤ 1 per (u,c), within 1e-6.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, &v) in self.x.iter().enumerate() {
            if !(-SUM_TOL..=1.0 + SUM_TOL).contains(&v) {
                return Err(Error::Domain(format!("utility factor {v} at flat index {i} outside [0,1]")));
            }
        }
        for u in 0..self.n {
            for s in 0..self.k {
                let total: f64 = (0..self.m).map(|c| self.get(u, c, s)).sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::Domain(format!("user {u} slot {s}: factors sum to {total}, expected 1")));
                }
            }
            for c in 0..self.m {
                let total: f64 = (0..self.k).map(|s| self.get(u, c, s)).sum();
                if total > 1.0 + SUM_TOL {
                    return Err(Error::Domain(format!("user {u} item {c}: factors over slots sum to {total} > 1")));
                }
            }
        }
        Ok(())
    }

    /// Spreads the compact per-item values evenly over slots: x[u][c][s] = xu[u][c] / k.
    ///
    /// Expects the result of [`super::build_simplified_lp`], whose first n·m
    /// columns are xu in (u, c) order.
    pub fn expand(result: &LpResult, inst: &Instance) -> Result<Self> {
        let (n, m, k) = (inst.n(), inst.m(), inst.k());
        Self::require_optimal(result, n * m)?;
        let mut x = Vec::with_capacity(n * m * k);
        for &v in &result.values[..n * m] {
            let share = v.clamp(0.0, 1.0) / k as f64;
            x.extend(std::iter::repeat(share).take(k));
        }
        Ok(FractionalSolution { n, m, k, x })
    }

    /// Reads the per-slot columns of [`super::build_full_lp`] or
    /// [`super::build_st_lp`]; their first n·m·k columns are x in (u, c, s) order.
    pub fn from_full(result: &LpResult, inst: &Instance) -> Result<Self> {
        let (n, m, k) = (inst.n(), inst.m(), inst.k());
        Self::require_optimal(result, n * m * k)?;
        let x = result.values[..n * m * k].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(FractionalSolution { n, m, k, x })
    }

    fn require_optimal(result: &LpResult, columns: usize) -> Result<()> {
        if !result.is_optimal() {
            return Err(Error::Domain(format!("LP result is {:?}, not optimal", result.status)));
        }
        if result.values.len() < columns {
            return Err(Error::Dimension(format!(
                "LP result has {} columns, expected at least {columns}",
                result.values.len()
            )));
        }
        Ok(())
    }
}

/// Expands a compact LP result into per-slot utility factors.
pub fn expand_solution(result: &LpResult, inst: &Instance) -> Result<FractionalSolution> {
    FractionalSolution::expand(result, inst)
}
