//! Exhaustive solvers for small instances and generators with known structure.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Configuration, Edge, Instance};
use crate::objective::{st_objective_mode, total_objective, ObjectiveMode};
use crate::rng::seeded;

/// Largest number of configurations the exhaustive search will visit.
pub const SEARCH_LIMIT: f64 = 2e7;

const TIE: f64 = 1e-12;

/// All ordered k-subsets of 0..m in lexicographic order.
fn arrangements(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(m: usize, k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in 0..m {
            if !used[c] {
                used[c] = true;
                cur.push(c);
                extend(m, k, cur, used, out);
                cur.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(m, k, &mut Vec::with_capacity(k), &mut vec![false; m], &mut out);
    out
}

/// P(m, k)^n, the number of feasible configurations.
pub fn search_space(inst: &Instance) -> f64 {
    let per_user: f64 = (0..inst.k()).map(|i| (inst.m() - i) as f64).product();
    per_user.powi(inst.n() as i32)
}

fn guard(inst: &Instance) -> Result<()> {
    let count = search_space(inst);
    if count > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge { count, limit: SEARCH_LIMIT });
    }
    Ok(())
}

struct Search<'a> {
    inst: &'a Instance,
    arr: &'a [Vec<usize>],
    /// Preference value of each arrangement for each user.
    pref_value: Vec<Vec<f64>>,
    social_weight: f64,
    /// Some((d_tel, M)) for the size-capped variant.
    st: Option<(f64, usize)>,
}

struct Walk {
    choice: Vec<usize>,
    /// slot_of[u * m + c] = slot where u sees c, or usize::MAX.
    slot_of: Vec<usize>,
    counts: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn pair_value(&self, edge: &Edge, u: usize, v: usize, walk: &Walk) -> f64 {
        let m = self.inst.m();
        let au = &self.arr[walk.choice[u]];
        let mut total = 0.0;
        for (s, &c) in au.iter().enumerate() {
            let sv = walk.slot_of[v * m + c];
            if sv == s {
                total += edge.weight(c);
            } else if sv != usize::MAX {
                if let Some((d, _)) = self.st {
                    total += d * edge.weight(c);
                }
            }
        }
        total
    }

    fn set(&self, walk: &mut Walk, u: usize, a: usize, on: bool) {
        let (m, k) = (self.inst.m(), self.inst.k());
        for (s, &c) in self.arr[a].iter().enumerate() {
            walk.slot_of[u * m + c] = if on { s } else { usize::MAX };
            if on {
                walk.counts[s * m + c] += 1;
            } else {
                walk.counts[s * m + c] -= 1;
            }
        }
        if on {
            walk.choice[u] = a;
        }
        debug_assert!(k == self.arr[a].len());
    }

    fn fits(&self, walk: &Walk, a: usize) -> bool {
        let Some((_, cap)) = self.st else { return true };
        let m = self.inst.m();
        self.arr[a].iter().enumerate().all(|(s, &c)| walk.counts[s * m + c] < cap)
    }

    fn dfs(&self, walk: &mut Walk, u: usize, value: f64) {
        let n = self.inst.n();
        if u == n {
            if walk.best.as_ref().map_or(true, |(b, _)| value > b + TIE) {
                walk.best = Some((value, walk.choice.clone()));
            }
            return;
        }
        for a in 0..self.arr.len() {
            if !self.fits(walk, a) {
                continue;
            }
            self.set(walk, u, a, true);
            let mut gain = self.pref_value[u][a];
            for &(v, e) in self.inst.neighbors(u) {
                if v < u {
                    gain += self.social_weight * self.pair_value(&self.inst.edges()[e], u, v, walk);
                }
            }
            self.dfs(walk, u + 1, value + gain);
            self.set(walk, u, a, false);
        }
    }

    /// Exhausts every configuration, sharding the first user's choices.
    fn run(&self) -> Option<Vec<usize>> {
        let (n, m, k) = (self.inst.n(), self.inst.m(), self.inst.k());
        let fresh = || Walk {
            choice: vec![0; n],
            slot_of: vec![usize::MAX; n * m],
            counts: vec![0; k * m],
            best: None,
        };
        if n == 0 {
            return Some(Vec::new());
        }
        let shards: Vec<Option<(f64, Vec<usize>)>> = (0..self.arr.len())
            .into_par_iter()
            .map(|a| {
                let mut walk = fresh();
                if !self.fits(&walk, a) {
                    return None;
                }
                self.set(&mut walk, 0, a, true);
                self.dfs(&mut walk, 1, self.pref_value[0][a]);
                walk.best
            })
            .collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for shard in shards.into_iter().flatten() {
            if best.as_ref().map_or(true, |(b, _)| shard.0 > b + TIE) {
                best = Some(shard);
            }
        }
        best.map(|(_, choice)| choice)
    }
}

fn search(inst: &Instance, mode: ObjectiveMode, st: Option<(f64, usize)>) -> Result<Option<Configuration>> {
    guard(inst)?;
    let arr = arrangements(inst.m(), inst.k());
    let (pref_weight, social_weight) = match mode {
        ObjectiveMode::UnitSum => (1.0, 1.0),
        ObjectiveMode::Canonical => (1.0 - inst.lambda(), inst.lambda()),
    };
    let pref_value = (0..inst.n())
        .map(|u| arr.iter().map(|a| pref_weight * a.iter().map(|&c| inst.pref(u, c)).sum::<f64>()).collect())
        .collect();
    let s = Search { inst, arr: &arr, pref_value, social_weight, st };
    Ok(s.run().map(|choice| {
        Configuration::from_rows_unchecked(choice.into_iter().map(|a| arr[a].clone()).collect())
    }))
}

/// Exact optimum by enumeration; ties go to the lexicographically first assignment.
pub fn brute_force(inst: &Instance, mode: ObjectiveMode) -> Result<(Configuration, f64)> {
    let config = search(inst, mode, None)?.ok_or(Error::NoFeasibleConfiguration)?;
    let value = total_objective(inst, &config, mode)?;
    Ok((config, value))
}

/// Exact optimum of the teleportation variant among configurations that
/// respect the subgroup size bound.
pub fn brute_force_st(inst: &Instance, mode: ObjectiveMode) -> Result<(Configuration, f64)> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    let config = search(inst, mode, Some((st.d_tel, st.max_size)))?.ok_or(Error::NoFeasibleConfiguration)?;
    let value = st_objective_mode(inst, &config, mode)?;
    Ok((config, value))
}

/// Uniform preferences, Bernoulli edges and τ ~ U[0, 0.5]; λ = ½.
pub fn gen_random(n: usize, m: usize, k: usize, edge_prob: f64, seed: u64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Domain(format!("edge probability {edge_prob} outside [0,1]")));
    }
    let mut rng = seeded(seed);
    let pref = (0..n).map(|_| (0..m).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_prob {
                let tau_uv = (0..m).map(|_| 0.5 * rng.gen::<f64>()).collect();
                let tau_vu = (0..m).map(|_| 0.5 * rng.gen::<f64>()).collect();
                edges.push(Edge { u, v, tau_uv, tau_vu });
            }
        }
    }
    Instance::new(n, m, k, 0.5, pref, edges)
}

fn complete_graph(n: usize, m: usize, tau: f64) -> Vec<Edge> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push(Edge { u, v, tau_uv: vec![tau; m], tau_vu: vec![tau; m] });
        }
    }
    edges
}

/// Complete graph, zero preferences, constant τ. Unit-sum optimum n(n−1)·τ·k.
pub fn gen_lemma1(n: usize, m: usize, k: usize, tau: f64) -> Result<Instance> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    Instance::new(n, m, k, 0.5, vec![vec![0.0; m]; n], complete_graph(n, m, tau))
}

/// The analytic unit-sum optimum of [`gen_lemma1`].
pub fn lemma1_optimum(n: usize, k: usize, tau: f64) -> f64 {
    (n * (n.saturating_sub(1))) as f64 * tau * k as f64
}

/// User i likes exactly items {i, n+i, …, (k−1)n+i}; m = n·k, no edges.
pub fn gen_gap_g(n: usize, k: usize) -> Result<Instance> {
    let m = n * k;
    let pref = (0..n).map(|u| (0..m).map(|c| if c % n == u { 1.0 } else { 0.0 }).collect()).collect();
    Instance::new(n, m, k, 0.5, pref, Vec::new())
}

/// Like [`gen_gap_g`] but every other item is worth 1 − ε and the graph is
/// complete with τ ≡ 1.
pub fn gen_gap_p(n: usize, k: usize, eps: f64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("eps {eps} outside [0,1]")));
    }
    let m = n * k;
    let pref = (0..n).map(|u| (0..m).map(|c| if c % n == u { 1.0 } else { 1.0 - eps }).collect()).collect();
    Instance::new(n, m, k, 0.5, pref, complete_graph(n, m, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StParams;

    #[test]
    fn arrangement_order_and_count() {
        let arr = arrangements(3, 2);
        assert_eq!(arr.len(), 6);
        assert_eq!(arr[0], vec![0, 1]);
        assert_eq!(arr[5], vec![2, 1]);
    }

    #[test]
    fn guard_reports_the_count() {
        let inst = gen_random(6, 6, 3, 0.5, 1).unwrap();
        match brute_force(&inst, ObjectiveMode::UnitSum) {
            Err(Error::SearchSpaceTooLarge { count, .. }) => assert_eq!(count, 120f64.powi(6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lemma1_small_optimum() {
        let inst = gen_lemma1(3, 4, 2, 1.0).unwrap();
        let (_, v) = brute_force(&inst, ObjectiveMode::UnitSum).unwrap();
        assert!((v - 12.0).abs() < 1e-9);
        assert_eq!(lemma1_optimum(3, 2, 1.0), 12.0);
    }

    #[test]
    fn size_cap_one_forbids_direct_co_display() {
        let inst = gen_lemma1(2, 3, 2, 1.0).unwrap().with_st(StParams { d_tel: 0.5, max_size: 1 }).unwrap();
        let (config, v) = brute_force_st(&inst, ObjectiveMode::UnitSum).unwrap();
        let rows = crate::model::AssignmentRows::rows(&config);
        assert!((0..2).all(|s| rows[0][s] != rows[1][s]));
        // Both items shared across slots: 2 items × d·(τ+τ).
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(gen_random(5, 4, 2, 0.4, 9).unwrap(), gen_random(5, 4, 2, 0.4, 9).unwrap());
        assert!(gen_random(5, 4, 2, 0.0, 9).unwrap().edges().is_empty());
        assert_eq!(gen_gap_g(3, 2).unwrap().m(), 6);
    }
}
