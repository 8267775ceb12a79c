//! Comparison algorithms: personalized, whole-group and static-subgroup top-k,
//! independent rounding, and balanced pre-partitioning for the size-capped variant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::FractionalSolution;
use crate::model::{Configuration, Instance, RawAssignment};
use crate::rng::seeded;

/// Indices of the k largest scores, descending. Scores within 1e-9 of each
/// other count as equal and go to the lower index.
fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut taken = vec![false; scores.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(scores.len()) {
        let mut best: Option<usize> = None;
        for (c, &v) in scores.iter().enumerate() {
            if !taken[c] && best.map_or(true, |b| v > scores[b] + 1e-9) {
                best = Some(c);
            }
        }
        let c = best.expect("an untaken item remains");
        taken[c] = true;
        out.push(c);
    }
    out
}

/// Each user gets their own k favourite items. Exact when λ = 0.
pub fn per_topk(inst: &Instance) -> Configuration {
    let rows = (0..inst.n()).map(|u| top_k(&inst.pref_rows()[u], inst.k())).collect();
    Configuration::from_rows_unchecked(rows)
}

/// Unit-sum value of showing item c to every member of `members` at one slot.
fn group_scores(inst: &Instance, members: &[usize]) -> Vec<f64> {
    let mut inside = vec![false; inst.n()];
    for &u in members {
        inside[u] = true;
    }
    (0..inst.m())
        .map(|c| {
            let pref: f64 = members.iter().map(|&u| inst.pref(u, c)).sum();
            let social: f64 =
                inst.edges().iter().filter(|e| inside[e.u] && inside[e.v]).map(|e| e.weight(c)).sum();
            pref + social
        })
        .collect()
}

/// Everyone sees the same k items with the highest whole-group score.
pub fn group_topk(inst: &Instance) -> Configuration {
    let everyone: Vec<usize> = (0..inst.n()).collect();
    let items = top_k(&group_scores(inst, &everyone), inst.k());
    Configuration::from_rows_unchecked(vec![items; inst.n()])
}

fn check_partition(inst: &Instance, partition: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; inst.n()];
    for group in partition {
        if group.is_empty() {
            return Err(Error::Domain("partition contains an empty group".into()));
        }
        for &u in group {
            if u >= inst.n() {
                return Err(Error::Domain(format!("partition names user {u}, instance has {}", inst.n())));
            }
            if std::mem::replace(&mut seen[u], true) {
                return Err(Error::Domain(format!("user {u} appears in two groups")));
            }
        }
    }
    if let Some(u) = seen.iter().position(|s| !s) {
        return Err(Error::Domain(format!("user {u} is not covered by the partition")));
    }
    Ok(())
}

/// Whole-group top-k applied independently inside each group (internal edges only).
pub fn subgroup_static(inst: &Instance, partition: &[Vec<usize>]) -> Result<Configuration> {
    check_partition(inst, partition)?;
    let mut rows = vec![Vec::new(); inst.n()];
    for group in partition {
        let items = top_k(&group_scores(inst, group), inst.k());
        for &u in group {
            rows[u] = items.clone();
        }
    }
    Ok(Configuration::from_rows_unchecked(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    /// Balanced groups with many internal friendships.
    Friendship,
    /// Clusters of similar preference rows.
    Preference,
}

impl std::str::FromStr for PartitionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "friendship" => Ok(PartitionMode::Friendship),
            "preference" => Ok(PartitionMode::Preference),
            other => Err(Error::Domain(format!("unknown partition mode {other:?}"))),
        }
    }
}

const MEDOID_RESTARTS: usize = 20;

/// Splits users into `g` groups. Groups are sorted by their lowest member.
///
/// Friendship mode grows g balanced groups (sizes ⌈n/g⌉ or ⌊n/g⌋) greedily by
/// friendships into the group and then swaps users between groups while the
/// internal edge count improves. Preference mode runs g-medoids on cosine
/// distance with seeded restarts.
pub fn auto_partition(inst: &Instance, mode: PartitionMode, g: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = inst.n();
    if g == 0 || g > n {
        return Err(Error::Domain(format!("group count {g} must lie in 1..={n}")));
    }
    let mut groups = match mode {
        PartitionMode::Friendship => grow_friendship_groups(inst, g),
        PartitionMode::Preference => medoid_groups(inst, g, seed),
    };
    for group in &mut groups {
        group.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    Ok(groups)
}

fn grow_friendship_groups(inst: &Instance, g: usize) -> Vec<Vec<usize>> {
    let n = inst.n();
    let mut adj = vec![vec![false; n]; n];
    for e in inst.edges() {
        adj[e.u][e.v] = true;
        adj[e.v][e.u] = true;
    }
    let degree: Vec<usize> = (0..n).map(|u| inst.neighbors(u).len()).collect();
    let capacity: Vec<usize> = (0..g).map(|i| n / g + usize::from(i < n % g)).collect();
    let mut group_of = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); g];

    // Seeds: highest degree, preferring users with few friends among earlier seeds.
    for (gi, group) in groups.iter_mut().enumerate() {
        let seeds: Vec<usize> = (0..n).filter(|&u| group_of[u] != usize::MAX).collect();
        let seed = (0..n)
            .filter(|&u| group_of[u] == usize::MAX)
            .min_by_key(|&u| {
                let clash = seeds.iter().filter(|&&v| adj[u][v]).count();
                (clash, std::cmp::Reverse(degree[u]), u)
            })
            .expect("g ≤ n");
        group_of[seed] = gi;
        group.push(seed);
    }
    // Greedy growth: the unassigned user with most friends in an open group joins it.
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for u in (0..n).filter(|&u| group_of[u] == usize::MAX) {
            for (gi, group) in groups.iter().enumerate() {
                if group.len() >= capacity[gi] {
                    continue;
                }
                let links = group.iter().filter(|&&v| adj[u][v]).count();
                if best.map_or(true, |(b, _, _)| links > b) {
                    best = Some((links, u, gi));
                }
            }
        }
        let Some((_, u, gi)) = best else { break };
        group_of[u] = gi;
        groups[gi].push(u);
    }
    // Pairwise swaps keep sizes fixed; stop at a local optimum.
    let links = |u: usize, gi: usize, group_of: &[usize], skip: usize| {
        (0..n).filter(|&v| v != u && v != skip && group_of[v] == gi && adj[u][v]).count() as i64
    };
    loop {
        let mut improved = false;
        for a in 0..n {
            for b in a + 1..n {
                let (ga, gb) = (group_of[a], group_of[b]);
                if ga == gb {
                    continue;
                }
                let before = links(a, ga, &group_of, b) + links(b, gb, &group_of, a);
                let after = links(a, gb, &group_of, b) + links(b, ga, &group_of, a);
                if after > before {
                    group_of[a] = gb;
                    group_of[b] = ga;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let mut out = vec![Vec::new(); g];
    for u in 0..n {
        out[group_of[u]].push(u);
    }
    out
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    match (na > 0.0, nb > 0.0) {
        (true, true) => 1.0 - dot / (na * nb),
        (false, false) => 0.0,
        _ => 1.0,
    }
}

fn medoid_groups(inst: &Instance, g: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = inst.n();
    let rows = inst.pref_rows();
    let dist: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| cosine_distance(&rows[a], &rows[b])).collect()).collect();
    let mut rng = seeded(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;

    for _ in 0..MEDOID_RESTARTS {
        let mut medoids = rand::seq::index::sample(&mut rng, n, g).into_vec();
        medoids.sort_unstable();
        let mut label = vec![0; n];
        for _ in 0..100 {
            for u in 0..n {
                label[u] = match medoids.iter().position(|&md| md == u) {
                    Some(i) => i,
                    None => (0..g).min_by(|&i, &j| dist[u][medoids[i]].total_cmp(&dist[u][medoids[j]])).unwrap(),
                };
            }
            let mut next = medoids.clone();
            for (i, slot) in next.iter_mut().enumerate() {
                let members: Vec<usize> = (0..n).filter(|&u| label[u] == i).collect();
                *slot = *members
                    .iter()
                    .min_by(|&&a, &&b| {
                        let ca: f64 = members.iter().map(|&v| dist[a][v]).sum();
                        let cb: f64 = members.iter().map(|&v| dist[b][v]).sum();
                        ca.total_cmp(&cb).then(a.cmp(&b))
                    })
                    .expect("a medoid belongs to its own cluster");
            }
            if next == medoids {
                break;
            }
            medoids = next;
        }
        let cost: f64 = (0..n).map(|u| dist[u][medoids[label[u]]]).sum();
        if best.as_ref().map_or(true, |(b, _)| cost < *b - 1e-12) {
            best = Some((cost, label.clone()));
        }
    }
    let (_, label) = best.expect("at least one restart");
    let mut out = vec![Vec::new(); g];
    for u in 0..n {
        out[label[u]].push(u);
    }
    out.retain(|grp| !grp.is_empty());
    out
}

/// Draws every cell independently from its slot distribution; duplicates are kept.
pub fn independent_rounding(inst: &Instance, frac: &FractionalSolution, seed: u64) -> Result<RawAssignment> {
    frac.check_dims(inst)?;
    let (n, m, k) = frac.dims();
    let mut rng = seeded(seed);
    let mut assign = vec![vec![0; k]; n];
    for (u, row) in assign.iter_mut().enumerate() {
        for (s, cell) in row.iter_mut().enumerate() {
            let total: f64 = (0..m).map(|c| frac.get(u, c, s).max(0.0)).sum();
            let mut pick = rng.gen::<f64>() * total;
            let mut chosen = m - 1;
            for c in 0..m {
                let w = frac.get(u, c, s).max(0.0);
                if w > 0.0 {
                    chosen = c;
                    if pick < w {
                        break;
                    }
                    pick -= w;
                }
            }
            *cell = chosen;
        }
    }
    Ok(RawAssignment { assign })
}

/// Number of (u, s, s') duplicate pairs in a raw assignment.
pub fn duplicate_count(raw: &RawAssignment) -> usize {
    raw.assign
        .iter()
        .map(|row| (0..row.len()).map(|s| row[s + 1..].iter().filter(|&&c| c == row[s]).count()).sum::<usize>())
        .sum()
}

/// One induced piece of a pre-partitioned instance.
#[derive(Debug, Clone)]
pub struct SubInstance {
    /// Original user indices, in the sub-instance's order.
    pub users: Vec<usize>,
    pub instance: Instance,
}

/// Splits users into ⌈n/M⌉ balanced friendship groups so that no group
/// exceeds M, and returns the induced sub-instances.
pub fn st_prepartition(inst: &Instance) -> Result<Vec<SubInstance>> {
    let st = inst.st().ok_or(Error::MissingSt)?;
    let groups = inst.n().div_ceil(st.max_size).max(1);
    if groups > inst.m() {
        return Err(Error::Domain(format!("{groups} groups need more than the {} available items", inst.m())));
    }
    if inst.n() == 0 {
        return Ok(Vec::new());
    }
    auto_partition(inst, PartitionMode::Friendship, groups, 0)?
        .into_iter()
        .map(|users| Ok(SubInstance { instance: inst.induced(&users)?, users }))
        .collect()
}

/// Runs `solve` on every sub-instance and stitches the rows back together.
pub fn solve_prepartitioned<F>(inst: &Instance, mut solve: F) -> Result<Configuration>
where
    F: FnMut(&Instance) -> Result<Configuration>,
{
    use crate::model::AssignmentRows;
    let mut rows = vec![Vec::new(); inst.n()];
    for piece in st_prepartition(inst)? {
        let config = solve(&piece.instance)?;
        for (i, &u) in piece.users.iter().enumerate() {
            rows[u] = config.rows()[i].clone();
        }
    }
    Configuration::new(rows, inst)
}
