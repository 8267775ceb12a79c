use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use svgic_core::baselines::{self, PartitionMode};
use svgic_core::lp::{solve_relaxation, solve_st_relaxation, FractionalSolution};
use svgic_core::objective::{raw_objective, st_objective_mode};
use svgic_core::oracle::{brute_force, brute_force_st};
use svgic_core::rounding::{avg, avg_best_of, avg_st, avgd, avgd_st, Diagnostics, Sampler};
use svgic_core::{AssignmentRows, Configuration, Instance, ObjectiveMode, RawAssignment};

/// Every solver the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Avg,
    Avgd,
    Per,
    Group,
    SubFriend,
    SubPref,
    Indep,
    Oracle,
    AvgSt,
    AvgdSt,
}

impl Algo {
    pub const ALL: [Algo; 10] = [
        Algo::Avg,
        Algo::Avgd,
        Algo::Per,
        Algo::Group,
        Algo::SubFriend,
        Algo::SubPref,
        Algo::Indep,
        Algo::Oracle,
        Algo::AvgSt,
        Algo::AvgdSt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Avg => "avg",
            Algo::Avgd => "avgd",
            Algo::Per => "per",
            Algo::Group => "group",
            Algo::SubFriend => "sub-friend",
            Algo::SubPref => "sub-pref",
            Algo::Indep => "indep",
            Algo::Oracle => "oracle",
            Algo::AvgSt => "avg-st",
            Algo::AvgdSt => "avgd-st",
        }
    }

    fn needs_st(self) -> bool {
        matches!(self, Algo::AvgSt | Algo::AvgdSt)
    }

    fn uses_fractional(self) -> bool {
        matches!(self, Algo::Avg | Algo::Avgd | Algo::Indep | Algo::AvgSt | Algo::AvgdSt)
    }

    fn is_randomized(self) -> bool {
        matches!(self, Algo::Avg | Algo::Indep | Algo::AvgSt | Algo::SubFriend | Algo::SubPref)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algo::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Algo::ALL.iter().map(|a| a.name()).collect();
            format!("unknown algorithm `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// A misuse of flags for the chosen algorithm; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Solver knobs shared by `solve` and `compare`.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub seed: u64,
    pub sampler: Sampler,
    pub r: f64,
    pub repeats: usize,
    pub groups: usize,
    pub partition: Option<Vec<Vec<usize>>>,
    pub frac: Option<FractionalSolution>,
    pub prepartition: bool,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub assign: Vec<Vec<usize>>,
    pub diagnostics: Option<Diagnostics>,
    /// False only for independent rounding, whose rows may repeat items.
    pub checked: bool,
}

impl Solved {
    fn from_config(config: Configuration, diagnostics: Option<Diagnostics>) -> Self {
        Solved { assign: config.rows().to_vec(), diagnostics, checked: true }
    }
}

/// Whether objectives are reported with indirect co-display ("st") or not ("svgic").
pub fn objective_mode_label(inst: &Instance, solved: &Solved) -> &'static str {
    if inst.st().is_some() && solved.checked {
        "st"
    } else {
        "svgic"
    }
}

/// Canonical and unit-sum objective of a solver output.
pub fn objectives(inst: &Instance, solved: &Solved) -> Result<(f64, f64)> {
    let raw = RawAssignment { assign: solved.assign.clone() };
    if objective_mode_label(inst, solved) == "st" {
        let config = Configuration::new(solved.assign.clone(), inst)?;
        return Ok((
            st_objective_mode(inst, &config, ObjectiveMode::Canonical)?,
            st_objective_mode(inst, &config, ObjectiveMode::UnitSum)?,
        ));
    }
    Ok((raw_objective(inst, &raw, ObjectiveMode::Canonical)?, raw_objective(inst, &raw, ObjectiveMode::UnitSum)?))
}

/// OPT_LP in the canonical convention: the teleportation relaxation when the
/// instance carries size parameters.
pub fn lp_bound(inst: &Instance) -> Result<f64> {
    let relax = if inst.st().is_some() { solve_st_relaxation(inst)? } else { solve_relaxation(inst)? };
    Ok(relax.canonical_bound)
}

fn fractional(inst: &Instance, algo: Algo, opts: &SolveOptions) -> Result<FractionalSolution> {
    if let Some(frac) = &opts.frac {
        if frac.dims() != (inst.n(), inst.m(), inst.k()) {
            return Err(UsageError(format!(
                "fractional solution has dimensions {:?}, instance needs {:?}",
                frac.dims(),
                (inst.n(), inst.m(), inst.k())
            ))
            .into());
        }
        return Ok(frac.clone());
    }
    let relax = if algo.needs_st() { solve_st_relaxation(inst)? } else { solve_relaxation(inst)? };
    Ok(relax.frac)
}

fn check_usage(inst: &Instance, algo: Algo, opts: &SolveOptions) -> Result<()> {
    if algo.needs_st() && inst.st().is_none() {
        bail!(UsageError(format!("{algo} needs an instance with size/teleportation parameters (\"st\")")));
    }
    if opts.partition.is_some() && !matches!(algo, Algo::SubFriend | Algo::SubPref) {
        bail!(UsageError(format!("--partition only applies to sub-friend and sub-pref, not {algo}")));
    }
    if opts.frac.is_some() && !algo.uses_fractional() {
        bail!(UsageError(format!("--frac does not apply to {algo}")));
    }
    if opts.repeats > 1 && algo != Algo::Avg {
        bail!(UsageError(format!("--repeats only applies to avg, not {algo}")));
    }
    if opts.prepartition {
        if inst.st().is_none() {
            bail!(UsageError("--prepartition needs an instance with size parameters".into()));
        }
        if !matches!(algo, Algo::Per | Algo::Group | Algo::SubFriend | Algo::SubPref) {
            bail!(UsageError(format!("--prepartition applies to the baselines only, not {algo}")));
        }
        if opts.partition.is_some() {
            bail!(UsageError("--prepartition and --partition cannot be combined".into()));
        }
    }
    Ok(())
}

fn baseline(inst: &Instance, algo: Algo, opts: &SolveOptions) -> Result<Configuration> {
    let subgroup = |mode: PartitionMode| -> svgic_core::Result<Configuration> {
        let partition = match &opts.partition {
            Some(p) => p.clone(),
            None => baselines::auto_partition(inst, mode, opts.groups.clamp(1, inst.n().max(1)), opts.seed)?,
        };
        baselines::subgroup_static(inst, &partition)
    };
    Ok(match algo {
        Algo::Per => baselines::per_topk(inst),
        Algo::Group => baselines::group_topk(inst),
        Algo::SubFriend => subgroup(PartitionMode::Friendship)?,
        Algo::SubPref => subgroup(PartitionMode::Preference)?,
        _ => unreachable!("not a baseline"),
    })
}

/// Runs one algorithm on an instance.
pub fn run(inst: &Instance, algo: Algo, opts: &SolveOptions) -> Result<Solved> {
    check_usage(inst, algo, opts)?;
    let solved = match algo {
        Algo::Per | Algo::Group | Algo::SubFriend | Algo::SubPref if opts.prepartition => {
            let inner = SolveOptions { prepartition: false, ..opts.clone() };
            let config = baselines::solve_prepartitioned(inst, |piece| {
                let piece = piece.clone().without_st();
                baseline(&piece, algo, &inner).map_err(|e| svgic_core::Error::Domain(e.to_string()))
            })?;
            Solved::from_config(config, None)
        }
        Algo::Per | Algo::Group | Algo::SubFriend | Algo::SubPref => Solved::from_config(baseline(inst, algo, opts)?, None),
        Algo::Oracle => {
            let (config, _) = if inst.st().is_some() {
                brute_force_st(inst, ObjectiveMode::UnitSum)?
            } else {
                brute_force(inst, ObjectiveMode::UnitSum)?
            };
            Solved::from_config(config, None)
        }
        Algo::Indep => {
            let raw = baselines::independent_rounding(inst, &fractional(inst, algo, opts)?, opts.seed)?;
            Solved { assign: raw.assign, diagnostics: None, checked: false }
        }
        Algo::Avg => {
            let frac = fractional(inst, algo, opts)?;
            let out = if opts.repeats > 1 {
                avg_best_of(inst, &frac, opts.seed, opts.sampler, opts.repeats)?
            } else {
                avg(inst, &frac, opts.seed, opts.sampler)?
            };
            Solved::from_config(out.config, Some(out.diagnostics))
        }
        Algo::Avgd => {
            let out = avgd(inst, &fractional(inst, algo, opts)?, opts.r)?;
            Solved::from_config(out.config, Some(out.diagnostics))
        }
        Algo::AvgSt => {
            let out = avg_st(inst, &fractional(inst, algo, opts)?, opts.seed, opts.sampler)?;
            Solved::from_config(out.config, Some(out.diagnostics))
        }
        Algo::AvgdSt => {
            let out = avgd_st(inst, &fractional(inst, algo, opts)?, opts.r)?;
            Solved::from_config(out.config, Some(out.diagnostics))
        }
    };
    Ok(solved)
}

/// Sampler to record in a solution file, if the algorithm draws focal parameters.
pub fn sampler_used(algo: Algo, opts: &SolveOptions) -> Option<Sampler> {
    matches!(algo, Algo::Avg | Algo::AvgSt).then_some(opts.sampler)
}

/// Seed to record, if the algorithm consumes randomness.
pub fn seed_used(algo: Algo, opts: &SolveOptions) -> Option<u64> {
    let partition_fixed = opts.partition.is_some();
    (algo.is_randomized() && !(partition_fixed && matches!(algo, Algo::SubFriend | Algo::SubPref))).then_some(opts.seed)
}

/// Reads a file with context in the error.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}
