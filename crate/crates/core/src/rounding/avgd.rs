//! Derandomized rounding: each step picks the focal parameters maximizing the
//! immediate gain plus r times the remaining relaxation value.

use serde::{Deserialize, Serialize};

use super::{complete_capped, fallback, Diagnostics, FocalParams, RoundingOutcome, RoundingState};
use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::model::{Configuration, Instance};
use crate::objective::scale_preferences;

/// Balancing ratio with the worst-case guarantee.
pub const DEFAULT_BALANCE: f64 = 0.25;

const SCORE_TIE: f64 = 1e-9;

/// The chosen candidate of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgdStep {
    pub focal: FocalParams,
    pub target: Vec<usize>,
    /// Utility realized by the target subgroup.
    pub alg: f64,
    /// Relaxation value still attainable from the unfilled cells afterwards.
    pub opt_lp_future: f64,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct AvgdTrace {
    pub config: Configuration,
    pub steps: Vec<AvgdStep>,
    pub diagnostics: Diagnostics,
}

/// Relaxation value of every unfilled cell and every edge whose two cells are unfilled.
struct Future {
    k: usize,
    unit: Vec<f64>,
    pair: Vec<f64>,
    total: f64,
}

impl Future {
    fn compute(inst: &Instance, state: &RoundingState) -> Self {
        let (n, m, k) = state.dims();
        let mut unit = vec![0.0; n * k];
        for u in 0..n {
            for s in 0..k {
                if state.cell(u, s).is_none() {
                    unit[u * k + s] = (0..m).map(|c| inst.pref(u, c) * state.factor(u, c, s)).sum();
                }
            }
        }
        let mut pair = vec![0.0; inst.edges().len() * k];
        for (e, edge) in inst.edges().iter().enumerate() {
            for s in 0..k {
                if state.cell(edge.u, s).is_none() && state.cell(edge.v, s).is_none() {
                    pair[e * k + s] = (0..m)
                        .map(|c| edge.weight(c) * state.factor(edge.u, c, s).min(state.factor(edge.v, c, s)))
                        .sum();
                }
            }
        }
        let total = unit.iter().sum::<f64>() + pair.iter().sum::<f64>();
        Future { k, unit, pair, total }
    }
}

fn score_candidate(
    inst: &Instance,
    state: &RoundingState,
    future: &Future,
    focal: &FocalParams,
    cap: Option<usize>,
    r: f64,
) -> (AvgdStep, bool) {
    let (n, _, _) = state.dims();
    let (c, s) = (focal.c, focal.s);
    let k = future.k;
    let (target, full) = state.capped_target(focal, cap);
    let mut in_target = vec![false; n];
    for &u in &target {
        in_target[u] = true;
    }
    let mut zeroed = vec![false; n];
    if full {
        for u in 0..n {
            if !in_target[u] && state.eligible(u, c, s) {
                zeroed[u] = true;
            }
        }
    }

    let mut alg: f64 = target.iter().map(|&u| inst.pref(u, c)).sum();
    let mut fut = future.total;
    for &u in &target {
        fut -= future.unit[u * k + s];
    }
    for u in (0..n).filter(|&u| zeroed[u]) {
        fut -= inst.pref(u, c) * state.factor(u, c, s);
    }
    for (e, edge) in inst.edges().iter().enumerate() {
        let (a, b) = (edge.u, edge.v);
        if in_target[a] && in_target[b] {
            alg += edge.weight(c);
        }
        if in_target[a] || in_target[b] {
            fut -= future.pair[e * k + s];
        } else if (zeroed[a] || zeroed[b]) && state.cell(a, s).is_none() && state.cell(b, s).is_none() {
            fut -= edge.weight(c) * state.factor(a, c, s).min(state.factor(b, c, s));
        }
    }
    let step = AvgdStep { focal: *focal, target, alg, opt_lp_future: fut, score: alg + r * fut };
    (step, full)
}

/// Runs the derandomized rounding and records every chosen step.
///
/// Preferences are rescaled internally when λ ≠ ½; `frac` should be a
/// relaxation of that scaled instance. With `cap`, steps respect the subgroup
/// size bound as in the randomized variant.
pub fn avgd_traced(inst: &Instance, frac: &FractionalSolution, r: f64, cap: Option<usize>) -> Result<AvgdTrace> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("balancing ratio must be non-negative, got {r}")));
    }
    let scaled = scale_preferences(inst)?;
    let mut state = RoundingState::new(&scaled, frac)?;
    let (n, m, k) = state.dims();
    let mut steps = Vec::new();
    let mut diag = Diagnostics::default();

    while !state.is_complete() {
        let future = Future::compute(&scaled, &state);
        let mut best: Option<AvgdStep> = None;
        for c in 0..m {
            for s in 0..k {
                if state.is_locked(c, s) {
                    continue;
                }
                let mut alphas: Vec<f64> =
                    (0..n).filter(|&u| state.eligible(u, c, s)).map(|u| state.factor(u, c, s)).collect();
                alphas.sort_by(f64::total_cmp);
                alphas.dedup();
                for alpha in alphas {
                    let focal = FocalParams { c, s, alpha };
                    let (step, _) = score_candidate(&scaled, &state, &future, &focal, cap, r);
                    if step.target.is_empty() {
                        continue;
                    }
                    if best.as_ref().map_or(true, |b| step.score > b.score + SCORE_TIE) {
                        best = Some(step);
                    }
                }
            }
        }
        diag.draws += 1;
        match best {
            Some(step) => {
                state.csf_step(&step.focal, cap);
                diag.iterations += 1;
                steps.push(step);
            }
            None => match cap {
                Some(cap) => {
                    let (rows, changed) = complete_capped(&state, &scaled, cap);
                    diag.fallback_assignments += changed;
                    return Ok(AvgdTrace { config: Configuration::from_rows_unchecked(rows), steps, diagnostics: diag });
                }
                None => {
                    fallback(&mut state, &scaled);
                    diag.fallback_assignments += 1;
                }
            },
        }
    }
    Ok(AvgdTrace { config: state.into_configuration()?, steps, diagnostics: diag })
}

/// Derandomized rounding with balancing ratio `r` (use [`DEFAULT_BALANCE`] for the guarantee).
pub fn avgd(inst: &Instance, frac: &FractionalSolution, r: f64) -> Result<RoundingOutcome> {
    let trace = avgd_traced(inst, frac, r, None)?;
    Ok(RoundingOutcome { config: trace.config, diagnostics: trace.diagnostics })
}

/// Derandomized rounding under the subgroup size bound M.
pub fn avgd_st(inst: &Instance, frac: &FractionalSolution, r: f64) -> Result<RoundingOutcome> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    let trace = avgd_traced(inst, frac, r, Some(st.max_size))?;
    Ok(RoundingOutcome { config: trace.config, diagnostics: trace.diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn first_iteration_internals() {
        let trace = avgd_traced(&running_example(), &running_example_fractional(), 0.25, None).unwrap();
        let first = &trace.steps[0];
        assert_eq!((first.focal.c, first.focal.s, first.focal.alpha), (4, 0, 0.0));
        assert_eq!(first.target, vec![ALICE, BOB, CHARLIE, DAVE]);
        assert!((first.alg - 3.35).abs() < 1e-9);
        assert!((first.opt_lp_future - 6.97).abs() < 1e-2);
        assert!((first.score - 5.09).abs() < 1e-2);
    }

    #[test]
    fn second_iteration_forms_the_tripod_group() {
        let trace = avgd_traced(&running_example(), &running_example_fractional(), 0.25, None).unwrap();
        let second = &trace.steps[1];
        assert_eq!((second.focal.c, second.focal.s), (0, 1));
        assert_eq!(second.target, vec![ALICE, BOB, DAVE]);
    }

    #[test]
    fn negative_ratio_is_rejected() {
        assert!(avgd(&running_example(), &running_example_fractional(), -1.0).is_err());
    }
}
