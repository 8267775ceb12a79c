//! Evaluation metrics for a configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{partition_subgroups, validate, AssignmentRows, Configuration, Instance};
use crate::objective::objective_parts;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub feasible: bool,
    pub objective_canonical: f64,
    pub objective_unit_sum: f64,
    /// Achieved preference utility, (1−λ)-weighted.
    pub preference_utility: f64,
    /// Achieved social utility, λ-weighted.
    pub social_utility: f64,
    pub personal_pct: f64,
    pub social_pct: f64,
    pub inter_pct: f64,
    pub intra_pct: f64,
    pub normalized_density: f64,
    pub codisplay_pct: f64,
    pub alone_pct: f64,
    pub mean_regret: f64,
    pub max_regret: f64,
    pub regret: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st_feasible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub st_violation_count: Option<usize>,
}

/// The CSV-friendly subset of a [`MetricsReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub feasible: bool,
    pub objective_canonical: f64,
    pub objective_unit_sum: f64,
    pub personal_pct: f64,
    pub social_pct: f64,
    pub inter_pct: f64,
    pub intra_pct: f64,
    pub normalized_density: f64,
    pub codisplay_pct: f64,
    pub alone_pct: f64,
    pub mean_regret: f64,
    pub max_regret: f64,
    pub st_feasible: Option<bool>,
    pub st_violation_count: Option<usize>,
}

impl MetricsReport {
    pub fn row(&self) -> MetricsRow {
        MetricsRow {
            feasible: self.feasible,
            objective_canonical: self.objective_canonical,
            objective_unit_sum: self.objective_unit_sum,
            personal_pct: self.personal_pct,
            social_pct: self.social_pct,
            inter_pct: self.inter_pct,
            intra_pct: self.intra_pct,
            normalized_density: self.normalized_density,
            codisplay_pct: self.codisplay_pct,
            alone_pct: self.alone_pct,
            mean_regret: self.mean_regret,
            max_regret: self.max_regret,
            st_feasible: self.st_feasible,
            st_violation_count: self.st_violation_count,
        }
    }
}

fn pct(num: f64, den: f64) -> f64 {
    if den <= TOL {
        0.0
    } else {
        (100.0 * num / den).clamp(0.0, 100.0)
    }
}

/// Computes every evaluation metric of a feasible configuration.
pub fn metrics(inst: &Instance, config: &Configuration) -> Result<MetricsReport> {
    compute(inst, config, true)
}

/// Like [`metrics`] but accepts any assignment; `feasible` reports whether it
/// passes [`validate`].
pub fn metrics_unchecked<A: AssignmentRows + ?Sized>(inst: &Instance, assign: &A) -> Result<MetricsReport> {
    let feasible = validate(assign.rows(), inst)?.is_empty();
    compute(inst, assign, feasible)
}

fn compute<A: AssignmentRows + ?Sized>(inst: &Instance, config: &A, feasible: bool) -> Result<MetricsReport> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::Domain("metrics need at least one user".into()));
    }
    let k = inst.k();
    let rows = config.rows();
    let lambda = inst.lambda();
    let parts = objective_parts(inst, config)?;
    let preference_utility = (1.0 - lambda) * parts.preference;
    let social_utility = lambda * parts.social;
    let canonical = preference_utility + social_utility;

    let edges = inst.edges();
    let mut intra_sum = 0.0;
    let mut density_sum = 0.0;
    let mut subgroup_count = 0usize;
    let mut ever_shared = vec![false; n];
    for s in 0..k {
        let part = partition_subgroups(config, s);
        let mut group_of = vec![0usize; n];
        for (g, sub) in part.groups.iter().enumerate() {
            for &u in &sub.users {
                group_of[u] = g;
            }
            if sub.users.len() > 1 {
                for &u in &sub.users {
                    ever_shared[u] = true;
                }
            }
        }
        let mut internal = vec![0usize; part.len()];
        let mut intra = 0usize;
        for e in edges {
            if group_of[e.u] == group_of[e.v] {
                intra += 1;
                internal[group_of[e.u]] += 1;
            }
        }
        if !edges.is_empty() {
            intra_sum += intra as f64 / edges.len() as f64;
        }
        for (g, sub) in part.groups.iter().enumerate() {
            let size = sub.users.len();
            if size >= 2 {
                density_sum += internal[g] as f64 / (size * (size - 1) / 2) as f64;
            }
            subgroup_count += 1;
        }
    }
    let (intra_pct, inter_pct) = if edges.is_empty() {
        (0.0, 0.0)
    } else {
        let intra = 100.0 * intra_sum / k as f64;
        (intra, 100.0 - intra)
    };
    let graph_density = if n >= 2 { edges.len() as f64 / (n * (n - 1) / 2) as f64 } else { 0.0 };
    let normalized_density = if graph_density > 0.0 && subgroup_count > 0 {
        (density_sum / subgroup_count as f64) / graph_density
    } else {
        0.0
    };

    let codisplayed = edges
        .iter()
        .filter(|e| (0..k).any(|s| rows[e.u][s] == rows[e.v][s]))
        .count();
    let codisplay_pct = pct(codisplayed as f64, edges.len() as f64);
    let alone = ever_shared.iter().filter(|&&shared| !shared).count();
    let alone_pct = pct(alone as f64, n as f64);

    let regret = regret_ratios(inst, rows);
    let mean_regret = regret.iter().sum::<f64>() / n as f64;
    let max_regret = regret.iter().cloned().fold(0.0, f64::max);

    let (st_feasible, st_violation_count) = match inst.st() {
        Some(_) => {
            let (ok, count) = st_feasibility(inst, config)?;
            (Some(ok), Some(count))
        }
        None => (None, None),
    };

    Ok(MetricsReport {
        feasible,
        objective_canonical: canonical,
        objective_unit_sum: parts.unit_sum(),
        preference_utility,
        social_utility,
        personal_pct: pct(preference_utility, canonical),
        social_pct: if canonical > TOL { 100.0 - pct(preference_utility, canonical) } else { 0.0 },
        inter_pct,
        intra_pct,
        normalized_density,
        codisplay_pct,
        alone_pct,
        mean_regret,
        max_regret,
        regret,
        st_feasible,
        st_violation_count,
    })
}

/// reg(u) = 1 − achieved / best optimistic k-itemset, per user.
fn regret_ratios(inst: &Instance, rows: &[Vec<usize>]) -> Vec<f64> {
    let lambda = inst.lambda();
    (0..inst.n())
        .map(|u| {
            let row = &rows[u];
            let achieved: f64 = row
                .iter()
                .enumerate()
                .map(|(s, &c)| {
                    let social: f64 = inst
                        .neighbors(u)
                        .iter()
                        .filter(|&&(v, _)| rows[v][s] == c)
                        .map(|&(_, e)| inst.edges()[e].tau_from(u, c))
                        .sum();
                    (1.0 - lambda) * inst.pref(u, c) + lambda * social
                })
                .sum();
            let mut optimistic: Vec<(f64, usize)> =
                (0..inst.m()).map(|c| (inst.optimistic_utility(u, c), c)).collect();
            optimistic.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let bound: f64 = optimistic.iter().take(inst.k()).map(|x| x.0).sum();
            if bound <= TOL {
                0.0
            } else {
                (1.0 - achieved / bound).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// Subgroup size check: returns (feasible, Σ max(0, |subgroup| − M)).
pub fn st_feasibility<A: AssignmentRows + ?Sized>(inst: &Instance, assign: &A) -> Result<(bool, usize)> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    let valid = validate(assign.rows(), inst)?.is_empty();
    let mut excess = 0;
    for s in 0..inst.k() {
        let mut counts = vec![0usize; inst.m()];
        for row in assign.rows() {
            if row[s] < inst.m() {
                counts[row[s]] += 1;
            }
        }
        excess += counts.iter().map(|&c| c.saturating_sub(st.max_size)).sum::<usize>();
    }
    Ok((valid && excess == 0, excess))
}
