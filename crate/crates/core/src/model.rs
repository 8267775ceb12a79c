//! Problem model: instances, configurations and the no-duplication check.
//!
//! Users, items and slots are plain zero-based indices. An [`Instance`] is
//! validated on construction and immutable afterwards; the same holds for a
//! [`Configuration`], which can only be obtained from a row matrix that passes
//! [`validate`].

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected friendship carrying both directed social utility vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// τ(u, v, c) for every item c.
    pub tau_uv: Vec<f64>,
    /// τ(v, u, c) for every item c.
    pub tau_vu: Vec<f64>,
}

impl Edge {
    /// Combined weight τ(u,v,c) + τ(v,u,c) of co-displaying `c` on this edge.
    #[inline]
    pub fn weight(&self, c: usize) -> f64 {
        self.tau_uv[c] + self.tau_vu[c]
    }

    /// τ(from, other, c) where `from` is one of the endpoints.
    #[inline]
    pub fn tau_from(&self, from: usize, c: usize) -> f64 {
        if from == self.u {
            self.tau_uv[c]
        } else {
            self.tau_vu[c]
        }
    }

    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Teleportation discount and subgroup size cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StParams {
    pub d_tel: f64,
    #[serde(rename = "M")]
    pub max_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    m: usize,
    k: usize,
    lambda: f64,
    pref: Vec<Vec<f64>>,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    st: Option<StParams>,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    n: usize,
    m: usize,
    k: usize,
    lambda: f64,
    pref: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    st: Option<StParams>,
    /// For every user, (neighbor, edge index) pairs.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let mut inst = Instance::new(raw.n, raw.m, raw.k, raw.lambda, raw.pref, raw.edges)?;
        if let Some(st) = raw.st {
            inst = inst.with_st(st)?;
        }
        Ok(inst)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            n: inst.n,
            m: inst.m,
            k: inst.k,
            lambda: inst.lambda,
            pref: inst.pref,
            edges: inst.edges,
            st: inst.st,
        }
    }
}

fn check_utility(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidInstance(format!("{what} must be finite and >= 0, got {value}")));
    }
    Ok(())
}

impl Instance {
    pub fn new(
        n: usize,
        m: usize,
        k: usize,
        lambda: f64,
        pref: Vec<Vec<f64>>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if k > m {
            return Err(Error::InvalidInstance(format!("k = {k} exceeds the item count m = {m}")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInstance(format!("lambda = {lambda} is outside [0, 1]")));
        }
        if pref.len() != n {
            return Err(Error::InvalidInstance(format!("pref has {} rows, expected {n}", pref.len())));
        }
        for (u, row) in pref.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "pref row {u} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for &p in row {
                check_utility(p, "preference")?;
            }
        }
        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInstance(format!("edge {idx} references a user outside 0..{n}")));
            }
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!("edge {idx} is a self-loop on user {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidInstance(format!("duplicate edge {{{}, {}}}", e.u, e.v)));
            }
            if e.tau_uv.len() != m || e.tau_vu.len() != m {
                return Err(Error::InvalidInstance(format!("edge {idx} social vectors must have length {m}")));
            }
            for &t in e.tau_uv.iter().chain(&e.tau_vu) {
                check_utility(t, "social utility")?;
            }
            adjacency[e.u].push((e.v, idx));
            adjacency[e.v].push((e.u, idx));
        }
        Ok(Instance { n, m, k, lambda, pref, edges, st: None, adjacency })
    }

    /// Attach size/teleportation parameters.
    pub fn with_st(mut self, st: StParams) -> Result<Self> {
        if !(0.0..1.0).contains(&st.d_tel) {
            return Err(Error::InvalidInstance(format!("d_tel = {} must lie in [0, 1)", st.d_tel)));
        }
        if st.max_size == 0 {
            return Err(Error::InvalidInstance("subgroup size bound M must be at least 1".into()));
        }
        if self.n.div_ceil(st.max_size) > self.m {
            return Err(Error::InvalidInstance(format!(
                "ceil(n / M) = {} exceeds the item count m = {}",
                self.n.div_ceil(st.max_size),
                self.m
            )));
        }
        self.st = Some(st);
        Ok(self)
    }

    pub fn without_st(mut self) -> Self {
        self.st = None;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidInstance(format!("lambda = {lambda} is outside [0, 1]")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub(crate) fn with_pref(mut self, pref: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(pref.len(), self.n);
        self.pref = pref;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }
    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    #[inline]
    pub fn pref(&self, u: usize, c: usize) -> f64 {
        self.pref[u][c]
    }
    pub fn pref_rows(&self) -> &[Vec<f64>] {
        &self.pref
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn st(&self) -> Option<&StParams> {
        self.st.as_ref()
    }
    /// (neighbor, edge index) pairs of user `u`.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adjacency[u]
    }

    /// w̄(u, c): the SAVG utility `u` would get from `c` if every friend viewed it too.
    pub fn optimistic_utility(&self, u: usize, c: usize) -> f64 {
        let social: f64 = self.adjacency[u].iter().map(|&(_, e)| self.edges[e].tau_from(u, c)).sum();
        (1.0 - self.lambda) * self.pref[u][c] + self.lambda * social
    }

    /// The sub-instance induced by `users` (internal edges only), in the given order.
    pub fn induced(&self, users: &[usize]) -> Result<Instance> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &u) in users.iter().enumerate() {
            if u >= self.n {
                return Err(Error::Domain(format!("user {u} out of range")));
            }
            local[u] = i;
        }
        let pref = users.iter().map(|&u| self.pref[u].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
            .map(|e| Edge { u: local[e.u], v: local[e.v], tau_uv: e.tau_uv.clone(), tau_vu: e.tau_vu.clone() })
            .collect();
        let inst = Instance::new(users.len(), self.m, self.k, self.lambda, pref, edges)?;
        match self.st {
            Some(st) => inst.with_st(st),
            None => Ok(inst),
        }
    }
}

/// A single reason why an assignment matrix is not a feasible configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// User `u` sees `item` at both `slot` and `other_slot`.
    Duplicate { u: usize, slot: usize, other_slot: usize, item: usize },
    /// The cell (u, s) holds an index outside the item set.
    InvalidItem { u: usize, slot: usize, item: usize },
}

/// Read access to an n×k item matrix.
pub trait AssignmentRows {
    fn rows(&self) -> &[Vec<usize>];

    #[inline]
    fn item(&self, u: usize, s: usize) -> usize {
        self.rows()[u][s]
    }
}

/// An n×k assignment that may violate the no-duplication constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAssignment {
    pub assign: Vec<Vec<usize>>,
}

impl AssignmentRows for RawAssignment {
    fn rows(&self) -> &[Vec<usize>] {
        &self.assign
    }
}

/// A feasible SAVG k-configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Configuration {
    assign: Vec<Vec<usize>>,
}

impl AssignmentRows for Configuration {
    fn rows(&self) -> &[Vec<usize>] {
        &self.assign
    }
}

impl Configuration {
    /// Checks `assign` against `inst` and wraps it when feasible.
    pub fn new(assign: Vec<Vec<usize>>, inst: &Instance) -> Result<Self> {
        let violations = validate(&assign, inst)?;
        if violations.is_empty() {
            Ok(Configuration { assign })
        } else {
            Err(Error::Infeasible(violations))
        }
    }

    pub(crate) fn from_rows_unchecked(assign: Vec<Vec<usize>>) -> Self {
        Configuration { assign }
    }

    pub fn into_raw(self) -> RawAssignment {
        RawAssignment { assign: self.assign }
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }
}

impl TryFrom<(RawAssignment, &Instance)> for Configuration {
    type Error = Error;
    fn try_from((raw, inst): (RawAssignment, &Instance)) -> Result<Self> {
        Configuration::new(raw.assign, inst)
    }
}

/// Lists every no-duplication and index violation of `assign`.
///
/// Returns a [`Error::Dimension`] error when the matrix is not n×k.
pub fn validate(assign: &[Vec<usize>], inst: &Instance) -> Result<Vec<Violation>> {
    if assign.len() != inst.n() {
        return Err(Error::Dimension(format!("{} rows for {} users", assign.len(), inst.n())));
    }
    let mut out = Vec::new();
    for (u, row) in assign.iter().enumerate() {
        if row.len() != inst.k() {
            return Err(Error::Dimension(format!("row {u} has {} slots, expected {}", row.len(), inst.k())));
        }
        for (s, &c) in row.iter().enumerate() {
            if c >= inst.m() {
                out.push(Violation::InvalidItem { u, slot: s, item: c });
                continue;
            }
            for (s2, &c2) in row.iter().enumerate().skip(s + 1) {
                if c2 == c {
                    out.push(Violation::Duplicate { u, slot: s, other_slot: s2, item: c });
                }
            }
        }
    }
    Ok(out)
}

/// One co-display subgroup at a fixed slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    pub item: usize,
    pub users: Vec<usize>,
}

/// The partition of users induced by the items shown at one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupPartition {
    pub slot: usize,
    pub groups: Vec<Subgroup>,
}

impl SubgroupPartition {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Groups users by the item they see at slot `s`; groups appear in order of
/// their lowest member.
pub fn partition_subgroups<A: AssignmentRows + ?Sized>(config: &A, s: usize) -> SubgroupPartition {
    let mut groups: Vec<Subgroup> = Vec::new();
    for (u, row) in config.rows().iter().enumerate() {
        let c = row[s];
        match groups.iter_mut().find(|g| g.item == c) {
            Some(g) => g.users.push(u),
            None => groups.push(Subgroup { item: c, users: vec![u] }),
        }
    }
    SubgroupPartition { slot: s, groups }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance::new(2, 3, 2, 0.5, vec![vec![0.1, 0.2, 0.3]; 2], vec![]).unwrap()
    }

    #[test]
    fn duplicate_is_reported_once() {
        let inst = Instance::new(1, 3, 3, 0.5, vec![vec![0.0; 3]], vec![]).unwrap();
        let v = validate(&[vec![1, 1, 2]], &inst).unwrap();
        assert_eq!(v, vec![Violation::Duplicate { u: 0, slot: 0, other_slot: 1, item: 1 }]);
    }

    #[test]
    fn invalid_index_and_dimension() {
        let inst = tiny();
        let v = validate(&[vec![0, 7], vec![0, 1]], &inst).unwrap();
        assert_eq!(v, vec![Violation::InvalidItem { u: 0, slot: 1, item: 7 }]);
        assert!(matches!(validate(&[vec![0, 1]], &inst), Err(Error::Dimension(_))));
        assert!(matches!(validate(&[vec![0], vec![1]], &inst), Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(Instance::new(1, 2, 3, 0.5, vec![vec![0.0; 2]], vec![]).is_err());
        assert!(Instance::new(1, 2, 0, 0.5, vec![vec![0.0; 2]], vec![]).is_err());
        assert!(Instance::new(1, 2, 1, 1.5, vec![vec![0.0; 2]], vec![]).is_err());
        assert!(Instance::new(1, 2, 1, 0.5, vec![vec![-0.1, 0.0]], vec![]).is_err());
        let e = |u, v| Edge { u, v, tau_uv: vec![0.0; 2], tau_vu: vec![0.0; 2] };
        assert!(Instance::new(2, 2, 1, 0.5, vec![vec![0.0; 2]; 2], vec![e(0, 0)]).is_err());
        assert!(Instance::new(2, 2, 1, 0.5, vec![vec![0.0; 2]; 2], vec![e(0, 1), e(1, 0)]).is_err());
        assert!(Instance::new(2, 2, 1, 0.5, vec![vec![0.0; 2]; 2], vec![e(0, 2)]).is_err());
    }

    #[test]
    fn st_parameters_are_checked() {
        let inst = tiny();
        assert!(inst.clone().with_st(StParams { d_tel: 1.0, max_size: 2 }).is_err());
        assert!(inst.clone().with_st(StParams { d_tel: 0.5, max_size: 0 }).is_err());
        assert!(inst.with_st(StParams { d_tel: 0.5, max_size: 1 }).is_ok());
        let crowded = Instance::new(4, 3, 1, 0.5, vec![vec![0.0; 3]; 4], vec![]).unwrap();
        assert!(crowded.with_st(StParams { d_tel: 0.0, max_size: 1 }).is_err());
    }

    #[test]
    fn partition_extremes() {
        let same = RawAssignment { assign: vec![vec![2, 0]; 3] };
        let p = partition_subgroups(&same, 0);
        assert_eq!(p.groups, vec![Subgroup { item: 2, users: vec![0, 1, 2] }]);
        let distinct = RawAssignment { assign: vec![vec![0], vec![1], vec![2]] };
        assert_eq!(partition_subgroups(&distinct, 0).len(), 3);
    }

    #[test]
    fn json_round_trip_keeps_schema() {
        let inst = tiny().with_st(StParams { d_tel: 0.25, max_size: 1 }).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"M\":1"));
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        let bad = text.replace("\"k\":2", "\"k\":4");
        assert!(serde_json::from_str::<Instance>(&bad).is_err());
    }
}
