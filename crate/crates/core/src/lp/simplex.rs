//! Dense two-phase primal simplex with implicit upper bounds.
//!
//! Every column is shifted so that its lower bound is zero. A nonbasic column
//! always sits at zero in its current orientation; a column that reaches its
//! finite upper bound is complemented (x ↦ u − x) instead of being pivoted.
//! Pricing is Dantzig's rule, switching to Bland's smallest-index rule after a
//! run of degenerate pivots so that the method cannot cycle.

use serde::{Deserialize, Serialize};

use super::model::{LpModel, Sense};
use crate::error::{Error, Result};

pub const ITERATION_LIMIT: usize = 1_000_000;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    /// cᵀx in the model's own sense; meaningful only when optimal.
    pub objective: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original column is expressed through standard (non-negative) columns.
#[derive(Debug, Clone)]
struct ColumnMap {
    offset: f64,
    parts: Vec<(usize, f64)>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    flipped: Vec<bool>,
    is_basic: Vec<bool>,
    d: Vec<f64>,
    z: f64,
    iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.cols]
    }

    /// Reduced costs and objective for `cost` given in original orientation.
    fn price(&mut self, cost: &[f64]) {
        let oriented: Vec<f64> = (0..self.cols)
            .map(|j| if self.flipped[j] { -cost[j] } else { cost[j] })
            .collect();
        self.d = oriented.clone();
        self.z = 0.0;
        for i in 0..self.rows {
            let cb = oriented[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.width..(i + 1) * self.width];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
            self.z += cb * row[self.cols];
        }
        for i in 0..self.rows {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn complement(&mut self, j: usize) {
        let u = self.upper[j];
        debug_assert!(u.is_finite());
        for i in 0..self.rows {
            let idx = i * self.width + j;
            let a = self.t[idx];
            if a != 0.0 {
                self.t[i * self.width + self.cols] -= a * u;
                self.t[idx] = -a;
            }
        }
        self.z += self.d[j] * u;
        self.d[j] = -self.d[j];
        self.flipped[j] = !self.flipped[j];
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for a in row.iter_mut() {
                *a /= p;
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for &j in &nz {
                let v = row[j] - f * pivot_row[j];
                row[j] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in nz.iter().filter(|&&j| j < self.cols) {
                self.d[j] -= dq * pivot_row[j];
            }
            self.z += dq * pivot_row[self.cols];
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    fn run(&mut self, allowed: &[bool]) -> Step {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= ITERATION_LIMIT {
                return Step::Limit;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = COST_TOL;
            for j in 0..self.cols {
                if self.is_basic[j] || !allowed[j] {
                    continue;
                }
                let dj = self.d[j];
                if dj > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(q) = entering else {
                return Step::Optimal;
            };
            self.iterations += 1;

            // Ratio test: (ratio, row, leaves at upper bound)
            let mut leave: Option<(f64, usize, bool)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                let candidate = if a > PIVOT_TOL {
                    Some((self.rhs(i).max(0.0) / a, false))
                } else if a < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    let room = (self.upper[self.basis[i]] - self.rhs(i)).max(0.0);
                    Some((room / -a, true))
                } else {
                    None
                };
                let Some((ratio, to_upper)) = candidate else { continue };
                let better = match leave {
                    None => true,
                    Some((r0, i0, _)) => {
                        if ratio < r0 - 1e-12 {
                            true
                        } else if ratio <= r0 + 1e-12 {
                            if bland {
                                self.basis[i] < self.basis[i0]
                            } else {
                                a.abs() > self.at(i0, q).abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((ratio, i, to_upper));
                }
            }
            let own = self.upper[q];
            match leave {
                None if own.is_infinite() => return Step::Unbounded,
                Some((ratio, _, _)) if own <= ratio => {
                    self.complement(q);
                    degenerate = 0;
                }
                None => {
                    self.complement(q);
                    degenerate = 0;
                }
                Some((ratio, r, to_upper)) => {
                    let leaving = self.basis[r];
                    self.pivot(r, q);
                    if to_upper {
                        self.complement(leaving);
                    }
                    if ratio <= 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                }
            }
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.cols];
        for i in 0..self.rows {
            v[self.basis[i]] = self.rhs(i);
        }
        for j in 0..self.cols {
            if self.flipped[j] {
                v[j] = self.upper[j] - v[j];
            }
        }
        v
    }
}

/// Solves a continuous model. Integer-flagged models are rejected.
pub fn solve_lp(model: &LpModel) -> Result<LpResult> {
    if model.has_integrality() {
        return Err(Error::Lp("model carries integrality flags; solve its relaxation".into()));
    }
    let nvars = model.num_vars();

    // Standard columns.
    let mut maps = Vec::with_capacity(nvars);
    let mut upper = Vec::new();
    for v in model.vars() {
        let (lo, hi) = (v.lower, v.upper);
        let map = if lo.is_finite() {
            upper.push(hi - lo);
            ColumnMap { offset: lo, parts: vec![(upper.len() - 1, 1.0)] }
        } else if hi.is_finite() {
            upper.push(f64::INFINITY);
            ColumnMap { offset: hi, parts: vec![(upper.len() - 1, -1.0)] }
        } else {
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            ColumnMap { offset: 0.0, parts: vec![(upper.len() - 2, 1.0), (upper.len() - 1, -1.0)] }
        };
        maps.push(map);
    }
    let structural = upper.len();

    // Rows after substitution, with non-negative right-hand sides.
    struct Row {
        coefs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows = Vec::with_capacity(model.num_constraints());
    for c in model.constraints() {
        let mut rhs = c.rhs;
        let mut coefs: Vec<(usize, f64)> = Vec::new();
        for &(j, a) in &c.coefs {
            rhs -= a * maps[j].offset;
            for &(col, sign) in &maps[j].parts {
                coefs.push((col, a * sign));
            }
        }
        let mut sense = c.sense;
        if rhs < 0.0 {
            rhs = -rhs;
            for x in &mut coefs {
                x.1 = -x.1;
            }
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(Row { coefs, sense, rhs });
    }

    let nslack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let nart = rows.iter().filter(|r| r.sense != Sense::Le).count();
    let cols = structural + nslack + nart;
    let width = cols + 1;
    let nrows = rows.len();
    upper.extend(std::iter::repeat(f64::INFINITY).take(nslack + nart));

    let mut t = vec![0.0; nrows * width];
    let mut basis = vec![0; nrows];
    let mut slack = structural;
    let mut art = structural + nslack;
    for (i, row) in rows.iter().enumerate() {
        let base = i * width;
        for &(col, a) in &row.coefs {
            t[base + col] += a;
        }
        t[base + cols] = row.rhs;
        match row.sense {
            Sense::Le => {
                t[base + slack] = 1.0;
                basis[i] = slack;
                slack += 1;
            }
            Sense::Ge => {
                t[base + slack] = -1.0;
                slack += 1;
                t[base + art] = 1.0;
                basis[i] = art;
                art += 1;
            }
            Sense::Eq => {
                t[base + art] = 1.0;
                basis[i] = art;
                art += 1;
            }
        }
    }
    let mut is_basic = vec![false; cols];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        rows: nrows,
        cols,
        width,
        t,
        basis,
        upper,
        flipped: vec![false; cols],
        is_basic,
        d: vec![0.0; cols],
        z: 0.0,
        iterations: 0,
    };
    let first_art = structural + nslack;

    // Phase 1: maximize −Σ artificials.
    if nart > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        tab.price(&cost);
        let allowed = vec![true; cols];
        match tab.run(&allowed) {
            Step::Limit => return Ok(limit_result(&tab, nvars)),
            Step::Unbounded => return Err(Error::Lp("phase one reported unbounded".into())),
            Step::Optimal => {}
        }
        let scale = rows.iter().map(|r| r.rhs).fold(1.0, f64::max);
        if tab.z < -FEAS_TOL * scale {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                objective: f64::NAN,
                values: vec![f64::NAN; nvars],
                iterations: tab.iterations,
            });
        }
        // Drive zero-valued artificials out of the basis where possible.
        for i in 0..tab.rows {
            if tab.basis[i] < first_art {
                continue;
            }
            let replacement = (0..first_art)
                .filter(|&j| !tab.is_basic[j])
                .max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()))
                .filter(|&j| tab.at(i, j).abs() > 1e-7);
            if let Some(j) = replacement {
                tab.pivot(i, j);
            }
        }
    }

    // Phase 2.
    let sign = if model.is_maximize() { 1.0 } else { -1.0 };
    let mut cost = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        let c = model.objective()[j] * sign;
        for &(col, s) in &map.parts {
            cost[col] += c * s;
        }
    }
    tab.price(&cost);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
    let status = match tab.run(&allowed) {
        Step::Optimal => LpStatus::Optimal,
        Step::Unbounded => LpStatus::Unbounded,
        Step::Limit => return Ok(limit_result(&tab, nvars)),
    };
    let values = recover(&tab, &maps);
    if status == LpStatus::Unbounded {
        return Ok(LpResult { status, objective: f64::INFINITY * sign, values, iterations: tab.iterations });
    }
    let violation = model.max_violation(&values);
    if violation > FEAS_TOL {
        return Err(Error::Lp(format!("numerical failure: final residual {violation:e}")));
    }
    Ok(LpResult { status, objective: model.evaluate(&values), values, iterations: tab.iterations })
}

fn recover(tab: &Tableau, maps: &[ColumnMap]) -> Vec<f64> {
    let cols = tab.column_values();
    maps.iter()
        .map(|m| m.offset + m.parts.iter().map(|&(c, s)| s * cols[c]).sum::<f64>())
        .collect()
}

fn limit_result(tab: &Tableau, nvars: usize) -> LpResult {
    LpResult {
        status: LpStatus::IterationLimit,
        objective: f64::NAN,
        values: vec![f64::NAN; nvars],
        iterations: tab.iterations,
    }
}
