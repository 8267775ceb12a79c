//! Co-display subgroup formation and the rounding algorithms built on it.

mod avgd;
mod state;

pub use avgd::{avgd, avgd_st, avgd_traced, AvgdStep, AvgdTrace, DEFAULT_BALANCE};
pub use state::{FocalParams, RoundingState};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::model::{Configuration, Instance};
use crate::objective::{total_objective, ObjectiveMode};
use crate::rng::seeded;

/// How focal parameters are drawn in the randomized algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Item and slot uniform, threshold uniform on (0,1]; draws with an empty
    /// target are rejected and redrawn.
    #[default]
    Uniform,
    /// (c, s) with probability proportional to x̄, threshold uniform on (0, x̄].
    Advanced,
}

impl std::str::FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampler::Uniform),
            "advanced" => Ok(Sampler::Advanced),
            other => Err(Error::Domain(format!("unknown sampler {other:?} (expected uniform or advanced)"))),
        }
    }
}

/// Counters reported alongside a rounded configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Subgroup-formation steps that assigned at least one user.
    pub iterations: usize,
    /// Focal parameter draws, including rejected ones.
    pub draws: usize,
    /// Cells filled or reassigned by the starvation fallback.
    pub fallback_assignments: usize,
}

#[derive(Debug, Clone)]
pub struct RoundingOutcome {
    pub config: Configuration,
    pub diagnostics: Diagnostics,
}

impl RoundingState {
    /// Draws focal parameters whose target is nonempty. Returns `None` when no
    /// (c, s) pair has a positive x̄. The second value counts draws used.
    pub fn sample_focal<R: Rng + ?Sized>(&self, rng: &mut R, sampler: Sampler) -> Option<(FocalParams, usize)> {
        let total = self.xbar_total();
        if total <= 0.0 {
            return None;
        }
        let (_, m, k) = self.dims();
        match sampler {
            Sampler::Uniform => {
                let mut draws = 0;
                loop {
                    draws += 1;
                    let c = rng.gen_range(0..m);
                    let s = rng.gen_range(0..k);
                    let alpha = 1.0 - rng.gen::<f64>();
                    if alpha <= self.xbar(c, s) {
                        return Some((FocalParams { c, s, alpha }, draws));
                    }
                }
            }
            Sampler::Advanced => {
                let mut pick = rng.gen::<f64>() * total;
                let mut chosen = None;
                'outer: for c in 0..m {
                    for s in 0..k {
                        let w = self.xbar(c, s);
                        if w <= 0.0 {
                            continue;
                        }
                        chosen = Some((c, s));
                        if pick < w {
                            break 'outer;
                        }
                        pick -= w;
                    }
                }
                let (c, s) = chosen?;
                let alpha = self.xbar(c, s) * (1.0 - rng.gen::<f64>());
                Some((FocalParams { c, s, alpha }, 1))
            }
        }
    }
}

/// Fills the first unfilled cell with its best unused item by optimistic utility.
pub(crate) fn fallback(state: &mut RoundingState, inst: &Instance) {
    let Some(&(u, s)) = state.unfilled().first() else { return };
    let c = (0..inst.m())
        .filter(|&c| state.eligible(u, c, s))
        .max_by(|&a, &b| inst.optimistic_utility(u, a).total_cmp(&inst.optimistic_utility(u, b)).then(b.cmp(&a)))
        .expect("k ≤ m leaves an unused item");
    state.force(u, c, s, None);
}

const COMPLETION_NODES: usize = 200_000;

struct Completion<'a> {
    inst: &'a Instance,
    cap: usize,
    rows: Vec<Vec<Option<usize>>>,
    holders: Vec<usize>,
    nodes: usize,
}

impl Completion<'_> {
    fn usable(&self, u: usize, c: usize, s: usize) -> bool {
        self.holders[c * self.inst.k() + s] < self.cap && !self.rows[u].contains(&Some(c))
    }

    fn candidates(&self, u: usize, s: usize) -> Vec<usize> {
        let mut items: Vec<usize> = (0..self.inst.m()).filter(|&c| self.usable(u, c, s)).collect();
        items.sort_by(|&a, &b| {
            self.inst.optimistic_utility(u, b).total_cmp(&self.inst.optimistic_utility(u, a)).then(a.cmp(&b))
        });
        items
    }

    /// Depth-first fill, most constrained cell first.
    fn search(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > COMPLETION_NODES {
            return false;
        }
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for u in 0..self.rows.len() {
            for s in 0..self.inst.k() {
                if self.rows[u][s].is_some() {
                    continue;
                }
                let items = self.candidates(u, s);
                if best.as_ref().map_or(true, |b| items.len() < b.2.len()) {
                    best = Some((u, s, items));
                }
            }
        }
        let Some((u, s, items)) = best else { return true };
        let k = self.inst.k();
        for c in items {
            self.rows[u][s] = Some(c);
            self.holders[c * k + s] += 1;
            if self.search() {
                return true;
            }
            self.holders[c * k + s] -= 1;
            self.rows[u][s] = None;
        }
        false
    }

    fn run(inst: &Instance, cap: usize, rows: Vec<Vec<Option<usize>>>) -> Option<Vec<Vec<usize>>> {
        let k = inst.k();
        let mut holders = vec![0; inst.m() * k];
        for row in &rows {
            for (s, c) in row.iter().enumerate() {
                if let Some(c) = c {
                    holders[c * k + s] += 1;
                }
            }
        }
        let mut search = Completion { inst, cap, rows, holders, nodes: 0 };
        search.search().then(|| search.rows.into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect())
    }
}

/// Finishes a capped state once sampling has starved. Keeps every placed cell
/// when a feasible completion exists; otherwise releases the rows of users with
/// open cells, and as a last resort builds a cyclic layout where user u shows
/// item (⌊u/M⌋ + s) mod m at slot s. Returns the rows and how many cells
/// were filled or reassigned here.
pub(crate) fn complete_capped(state: &RoundingState, inst: &Instance, cap: usize) -> (Vec<Vec<usize>>, usize) {
    let current = state.rows();
    let changed = |rows: &Vec<Vec<usize>>| {
        rows.iter().zip(&current).flat_map(|(r, c)| r.iter().zip(c)).filter(|(a, b)| Some(**a) != **b).count()
    };
    if let Some(rows) = Completion::run(inst, cap, current.clone()) {
        let n = changed(&rows);
        return (rows, n);
    }
    let released = current
        .iter()
        .map(|row| if row.contains(&None) { vec![None; row.len()] } else { row.clone() })
        .collect();
    if let Some(rows) = Completion::run(inst, cap, released) {
        let n = changed(&rows);
        return (rows, n);
    }
    let (n, m, k) = state.dims();
    let rows = (0..n).map(|u| (0..k).map(|s| (u / cap + s) % m).collect()).collect();
    let changed = changed(&rows);
    (rows, changed)
}

fn run_random(
    inst: &Instance,
    frac: &FractionalSolution,
    seed: u64,
    sampler: Sampler,
    cap: Option<usize>,
) -> Result<RoundingOutcome> {
    let mut state = RoundingState::new(inst, frac)?;
    let mut rng = seeded(seed);
    let mut diag = Diagnostics::default();
    while !state.is_complete() {
        match state.sample_focal(&mut rng, sampler) {
            Some((focal, draws)) => {
                diag.draws += draws;
                if !state.csf_step(&focal, cap).is_empty() {
                    diag.iterations += 1;
                }
            }
            None => match cap {
                Some(cap) => {
                    let (rows, changed) = complete_capped(&state, inst, cap);
                    diag.fallback_assignments += changed;
                    return Ok(RoundingOutcome { config: Configuration::from_rows_unchecked(rows), diagnostics: diag });
                }
                None => {
                    fallback(&mut state, inst);
                    diag.fallback_assignments += 1;
                }
            },
        }
    }
    Ok(RoundingOutcome { config: state.into_configuration()?, diagnostics: diag })
}

/// Randomized rounding: repeated subgroup formation with sampled focal parameters.
///
/// `frac` should come from the preference-scaled instance when λ ≠ ½.
pub fn avg(inst: &Instance, frac: &FractionalSolution, seed: u64, sampler: Sampler) -> Result<RoundingOutcome> {
    run_random(inst, frac, seed, sampler, None)
}

/// Randomized rounding with the subgroup size cap M and slot locking.
pub fn avg_st(inst: &Instance, frac: &FractionalSolution, seed: u64, sampler: Sampler) -> Result<RoundingOutcome> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    run_random(inst, frac, seed, sampler, Some(st.max_size))
}

/// Runs the randomized algorithm `repeats` times (seeds seed, seed+1, …) and
/// keeps the configuration with the highest canonical objective.
pub fn avg_best_of(
    inst: &Instance,
    frac: &FractionalSolution,
    seed: u64,
    sampler: Sampler,
    repeats: usize,
) -> Result<RoundingOutcome> {
    let mut best: Option<(f64, RoundingOutcome)> = None;
    for i in 0..repeats.max(1) as u64 {
        let out = avg(inst, frac, seed.wrapping_add(i), sampler)?;
        let value = total_objective(inst, &out.config, ObjectiveMode::Canonical)?;
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, out));
        }
    }
    Ok(best.expect("at least one run").1)
}

fn check_focal(inst: &Instance, focal: &FocalParams) -> Result<()> {
    if focal.c >= inst.m() || focal.s >= inst.k() || !(0.0..=1.0).contains(&focal.alpha) {
        return Err(Error::Domain(format!("invalid focal parameters {focal:?}")));
    }
    Ok(())
}

/// Applies a fixed focal sequence and returns the (possibly partial) state.
pub fn replay_state(inst: &Instance, frac: &FractionalSolution, sequence: &[FocalParams]) -> Result<RoundingState> {
    let mut state = RoundingState::new(inst, frac)?;
    for focal in sequence {
        check_focal(inst, focal)?;
        state.csf_step(focal, None);
    }
    Ok(state)
}

/// Deterministic replay of a focal sequence; errors with the unfilled cells if
/// the sequence runs out first.
pub fn avg_replay(inst: &Instance, frac: &FractionalSolution, sequence: &[FocalParams]) -> Result<Configuration> {
    replay_state(inst, frac, sequence)?.into_configuration()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::model::{validate, AssignmentRows};

    #[test]
    fn replay_prefix_matches_the_walkthrough() {
        let inst = running_example();
        let frac = running_example_fractional();
        let seq = printed_replay_sequence();
        let st = replay_state(&inst, &frac, &seq[..2]).unwrap();
        for u in [BOB, CHARLIE, DAVE] {
            assert_eq!(st.cell(u, 1), Some(3));
        }
        assert_eq!(st.cell(ALICE, 1), None);
        let err = avg_replay(&inst, &frac, &seq[..2]).unwrap_err();
        let Error::IncompleteReplay { unfilled } = err else { panic!() };
        assert_eq!(unfilled, vec![(0, 0), (0, 1), (1, 0), (2, 0), (2, 2), (3, 0)]);
    }

    #[test]
    fn empty_sequence_names_every_cell() {
        let inst = running_example();
        let err = avg_replay(&inst, &running_example_fractional(), &[]).unwrap_err();
        let Error::IncompleteReplay { unfilled } = err else { panic!() };
        assert_eq!(unfilled.len(), 12);
    }

    #[test]
    fn invalid_focal_is_rejected() {
        let inst = running_example();
        let bad = [FocalParams { c: 9, s: 0, alpha: 0.1 }];
        assert!(avg_replay(&inst, &running_example_fractional(), &bad).is_err());
    }

    #[test]
    fn both_samplers_produce_feasible_configurations() {
        let inst = running_example();
        let frac = running_example_fractional();
        for sampler in [Sampler::Uniform, Sampler::Advanced] {
            for seed in 0..20 {
                let out = avg(&inst, &frac, seed, sampler).unwrap();
                assert!(validate(out.config.rows(), &inst).unwrap().is_empty());
                assert_eq!(out.diagnostics.fallback_assignments, 0);
            }
        }
    }

    #[test]
    fn same_seed_same_output() {
        let inst = running_example();
        let frac = running_example_fractional();
        let a = avg(&inst, &frac, 42, Sampler::Uniform).unwrap();
        let b = avg(&inst, &frac, 42, Sampler::Uniform).unwrap();
        assert_eq!(a.config, b.config);
        assert_eq!(a.diagnostics, b.diagnostics);
    }

    #[test]
    fn sampler_parses() {
        assert_eq!("advanced".parse::<Sampler>().unwrap(), Sampler::Advanced);
        assert!("other".parse::<Sampler>().is_err());
    }
}
