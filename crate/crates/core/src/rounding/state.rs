use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::model::{Configuration, Instance};

/// Utility factors below this are treated as zero (LP round-off).
const ZERO_FACTOR: f64 = 1e-9;

/// One (item, slot, threshold) triple driving a subgroup-formation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalParams {
    pub c: usize,
    pub s: usize,
    pub alpha: f64,
}

/// Partially built configuration plus the bookkeeping the samplers need.
#[derive(Debug, Clone)]
pub struct RoundingState {
    n: usize,
    m: usize,
    k: usize,
    assign: Vec<Option<usize>>,
    has_item: Vec<bool>,
    x: FractionalSolution,
    xbar: Vec<f64>,
    locked: Vec<bool>,
    holders: Vec<usize>,
    filled: usize,
}

impl RoundingState {
    pub fn new(inst: &Instance, frac: &FractionalSolution) -> Result<Self> {
        frac.check_dims(inst)?;
        let (n, m, k) = (inst.n(), inst.m(), inst.k());
        let mut x = frac.clone();
        for u in 0..n {
            for c in 0..m {
                for s in 0..k {
                    if x.get(u, c, s) < ZERO_FACTOR {
                        x.set(u, c, s, 0.0);
                    }
                }
            }
        }
        let mut state = RoundingState {
            n,
            m,
            k,
            assign: vec![None; n * k],
            has_item: vec![false; n * m],
            x,
            xbar: vec![0.0; m * k],
            locked: vec![false; m * k],
            holders: vec![0; m * k],
            filled: 0,
        };
        for c in 0..m {
            for s in 0..k {
                state.refresh_xbar(c, s);
            }
        }
        Ok(state)
    }

    pub fn cell(&self, u: usize, s: usize) -> Option<usize> {
        self.assign[u * self.k + s]
    }

    /// Cell (u, s) is empty and item c is nowhere in row u.
    pub fn eligible(&self, u: usize, c: usize, s: usize) -> bool {
        self.assign[u * self.k + s].is_none() && !self.has_item[u * self.m + c]
    }

    /// Current utility factor (after any size-cap zeroing).
    pub fn factor(&self, u: usize, c: usize, s: usize) -> f64 {
        self.x.get(u, c, s)
    }

    pub fn factors(&self) -> &FractionalSolution {
        &self.x
    }

    /// Largest factor of (c, s) over currently eligible users, 0 if none.
    pub fn xbar(&self, c: usize, s: usize) -> f64 {
        self.xbar[c * self.k + s]
    }

    pub fn xbar_total(&self) -> f64 {
        self.xbar.iter().sum()
    }

    pub fn is_locked(&self, c: usize, s: usize) -> bool {
        self.locked[c * self.k + s]
    }

    /// Users currently holding c at slot s.
    pub fn holders(&self, c: usize, s: usize) -> usize {
        self.holders[c * self.k + s]
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_complete(&self) -> bool {
        self.filled == self.n * self.k
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.k)
    }

    /// Unfilled cells as (user, slot), row-major.
    pub fn unfilled(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (0..self.k).map(move |s| (u, s)))
            .filter(|&(u, s)| self.cell(u, s).is_none())
            .collect()
    }

    /// Eligible users for (c, s) whose factor reaches α, in index order.
    pub fn target(&self, focal: &FocalParams) -> Vec<usize> {
        if self.is_locked(focal.c, focal.s) {
            return Vec::new();
        }
        (0..self.n)
            .filter(|&u| self.eligible(u, focal.c, focal.s) && self.x.get(u, focal.c, focal.s) >= focal.alpha)
            .collect()
    }

    /// Applies the size cap to a target: keeps the highest factors (ties to
    /// lower index) up to the remaining room. Returns (kept, cap reached).
    pub fn capped_target(&self, focal: &FocalParams, cap: Option<usize>) -> (Vec<usize>, bool) {
        let mut target = self.target(focal);
        let Some(cap) = cap else { return (target, false) };
        let room = cap.saturating_sub(self.holders(focal.c, focal.s));
        if target.len() < room {
            return (target, false);
        }
        let (c, s) = (focal.c, focal.s);
        target.sort_by(|&a, &b| self.x.get(b, c, s).total_cmp(&self.x.get(a, c, s)).then(a.cmp(&b)));
        target.truncate(room);
        target.sort_unstable();
        (target, true)
    }

    /// One subgroup-formation step; returns the users that received focal.c.
    ///
    /// With a cap, users are admitted in descending factor order until M users
    /// hold the item at that slot; the pair is then locked and the factors of
    /// the remaining eligible users are zeroed.
    pub fn csf_step(&mut self, focal: &FocalParams, cap: Option<usize>) -> Vec<usize> {
        let (target, full) = self.capped_target(focal, cap);
        let (c, s) = (focal.c, focal.s);
        for &u in &target {
            self.place(u, c, s);
        }
        if full {
            self.lock(c, s);
        }
        self.refresh_after(&target, c, s);
        target
    }

    fn lock(&mut self, c: usize, s: usize) {
        self.locked[c * self.k + s] = true;
        for u in 0..self.n {
            if self.eligible(u, c, s) {
                self.x.set(u, c, s, 0.0);
            }
        }
    }

    fn place(&mut self, u: usize, c: usize, s: usize) {
        debug_assert!(self.eligible(u, c, s));
        self.assign[u * self.k + s] = Some(c);
        self.has_item[u * self.m + c] = true;
        self.holders[c * self.k + s] += 1;
        self.filled += 1;
    }

    /// Fills one cell outside the sampling process (starvation fallback).
    pub(crate) fn force(&mut self, u: usize, c: usize, s: usize, cap: Option<usize>) {
        self.place(u, c, s);
        if cap.is_some_and(|m| self.holders(c, s) >= m) && !self.is_locked(c, s) {
            self.lock(c, s);
        }
        self.refresh_after(&[u], c, s);
    }

    fn refresh_after(&mut self, users: &[usize], c: usize, s: usize) {
        if users.is_empty() && !self.is_locked(c, s) {
            return;
        }
        for c2 in 0..self.m {
            self.refresh_xbar(c2, s);
        }
        for s2 in 0..self.k {
            self.refresh_xbar(c, s2);
        }
    }

    fn refresh_xbar(&mut self, c: usize, s: usize) {
        let best = (0..self.n)
            .filter(|&u| self.eligible(u, c, s))
            .map(|u| self.x.get(u, c, s))
            .fold(0.0, f64::max);
        self.xbar[c * self.k + s] = if self.is_locked(c, s) { 0.0 } else { best };
    }

    /// Converts a complete state into a configuration.
    pub fn into_configuration(self) -> Result<Configuration> {
        if !self.is_complete() {
            return Err(Error::IncompleteReplay { unfilled: self.unfilled() });
        }
        let rows = (0..self.n)
            .map(|u| (0..self.k).map(|s| self.assign[u * self.k + s].expect("complete")).collect())
            .collect();
        Ok(Configuration::from_rows_unchecked(rows))
    }

    pub fn rows(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n).map(|u| self.assign[u * self.k..(u + 1) * self.k].to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn state() -> RoundingState {
        RoundingState::new(&running_example(), &running_example_fractional()).unwrap()
    }

    #[test]
    fn fresh_state_is_fully_eligible() {
        let st = state();
        assert!((0..4).all(|u| (0..5).all(|c| (0..3).all(|s| st.eligible(u, c, s)))));
        assert!((st.xbar(0, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(st.filled(), 0);
    }

    #[test]
    fn first_walkthrough_step() {
        let mut st = state();
        let got = st.csf_step(&FocalParams { c: 0, s: 2, alpha: 0.06 }, None);
        assert_eq!(got, vec![ALICE, BOB, DAVE]);
        assert!(!st.eligible(ALICE, 0, 0), "tripod may not repeat for Alice");
        assert!(!st.eligible(ALICE, 3, 2), "slot 3 is taken");
        assert!(st.eligible(CHARLIE, 0, 0));
        // Only Charlie is eligible for the tripod, and his factor is zero.
        assert_eq!(st.xbar(0, 0), 0.0);
    }

    #[test]
    fn threshold_above_all_factors_is_a_no_op() {
        let mut st = state();
        assert!(st.csf_step(&FocalParams { c: 0, s: 0, alpha: 0.9 }, None).is_empty());
        assert_eq!(st.filled(), 0);
    }

    #[test]
    fn capped_step_zeroes_and_locks() {
        let inst = Instance::new(3, 3, 1, 0.5, vec![vec![0.0; 3]; 3], vec![]).unwrap();
        let frac = FractionalSolution::from_nested(vec![
            vec![vec![0.5], vec![0.5], vec![0.0]],
            vec![vec![0.4], vec![0.6], vec![0.0]],
            vec![vec![0.3], vec![0.0], vec![0.7]],
        ])
        .unwrap();
        let mut st = RoundingState::new(&inst, &frac).unwrap();
        let got = st.csf_step(&FocalParams { c: 0, s: 0, alpha: 0.1 }, Some(2));
        assert_eq!(got, vec![0, 1]);
        assert!(st.is_locked(0, 0));
        assert_eq!(st.factor(2, 0, 0), 0.0);
        assert_eq!(st.xbar(0, 0), 0.0);
        assert!(st.csf_step(&FocalParams { c: 0, s: 0, alpha: 0.0 }, Some(2)).is_empty());
    }
}
