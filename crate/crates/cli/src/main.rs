mod algo;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use svgic_core::lp::{build_full_lp, build_simplified_lp, build_st_lp, export_model, FractionalSolution};
use svgic_core::metrics::metrics_unchecked;
use svgic_core::oracle::{gen_gap_g, gen_gap_p, gen_lemma1, gen_random};
use svgic_core::rounding::{avg_replay, Diagnostics, Sampler};
use svgic_core::{scale_preferences, AssignmentRows, FocalParams, Instance, RawAssignment, StParams};

use algo::{read_json, Algo, SolveOptions, Solved, UsageError};

#[derive(Parser)]
#[command(name = "svgic", version, about = "Social-aware VR group-item configuration solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Gen(GenArgs),
    /// Run one algorithm and write its configuration.
    Solve(SolveArgs),
    /// Apply a fixed focal parameter sequence.
    Replay(ReplayArgs),
    /// Compute evaluation metrics of a solution.
    Eval(EvalArgs),
    /// Run several algorithms over several seeds and emit a CSV table.
    Compare(CompareArgs),
    /// Write the integer program or its relaxation in CPLEX LP format.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Lemma1,
    GapG,
    GapP,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Ignored by gap-g, which always uses m = n·k.
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the generator's λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Teleportation discount; requires --max-size.
    #[arg(long, requires = "max_size")]
    d_tel: Option<f64>,
    /// Subgroup size bound M; requires --d-tel.
    #[arg(long, requires = "d_tel")]
    max_size: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "uniform")]
    sampler: Sampler,
    /// Balancing ratio of the derandomized algorithms.
    #[arg(long, default_value_t = 0.25)]
    r: f64,
    /// Run avg this many times (consecutive seeds) and keep the best.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Number of subgroups for automatic partitioning.
    #[arg(long, default_value_t = 2)]
    groups: usize,
    /// Split users into ⌈n/M⌉ balanced groups and solve each separately (baselines, size-capped instances).
    #[arg(long)]
    prepartition: bool,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_algo)]
    algo: Algo,
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    flags: SolverFlags,
    /// Fixed partition (JSON list of user lists) for the subgroup baselines.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Fractional solution to round instead of solving the relaxation.
    #[arg(long)]
    frac: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReplayArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    frac: PathBuf,
    /// JSON list of {"c", "s", "alpha"} focal parameters.
    #[arg(long)]
    seq: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    sol: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated algorithm names; may be empty.
    #[arg(long, default_value = "")]
    algos: String,
    /// Seeds as a list ("1,2,5") or an inclusive range ("0..9").
    #[arg(long, default_value = "0")]
    seeds: String,
    #[command(flatten)]
    flags: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Full,
    Simp,
    St,
}

#[derive(Clone, Copy, ValueEnum)]
enum Integrality {
    Relaxed,
    Binary,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long, value_enum, default_value = "relaxed")]
    integrality: Integrality,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse()
}

/// The solution file written by `solve` and `replay`, and read by `eval`.
#[derive(Debug, Serialize, Deserialize)]
struct SolutionFile {
    assign: Vec<Vec<usize>>,
    #[serde(default)]
    algo: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    sampler: Option<Sampler>,
    #[serde(default)]
    iterations: Option<usize>,
    #[serde(default)]
    diagnostics: Option<Diagnostics>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    read_json(path, "instance")
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut inst = match args.kind {
        GenKind::Random => gen_random(args.n, args.m, args.k, args.edge_prob, args.seed)?,
        GenKind::Lemma1 => gen_lemma1(args.n, args.m, args.k, args.tau)?,
        GenKind::GapG => gen_gap_g(args.n, args.k)?,
        GenKind::GapP => gen_gap_p(args.n, args.k, args.eps)?,
    };
    if let Some(lambda) = args.lambda {
        inst = inst.with_lambda(lambda)?;
    }
    if let (Some(d_tel), Some(max_size)) = (args.d_tel, args.max_size) {
        inst = inst.with_st(StParams { d_tel, max_size })?;
    }
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&inst)? + "\n"))
}

fn solver_options(flags: &SolverFlags, partition: Option<Vec<Vec<usize>>>, frac: Option<FractionalSolution>) -> SolveOptions {
    SolveOptions {
        seed: flags.seed,
        sampler: flags.sampler,
        r: flags.r,
        repeats: flags.repeats,
        groups: flags.groups,
        partition,
        frac,
        prepartition: flags.prepartition,
    }
}

fn summary_line(name: &str, mode: &str, objectives: (f64, f64), runtime_ms: f64, seed: Option<u64>) -> String {
    let seed = seed.map(|s| s.to_string()).unwrap_or_default();
    format!("{name},{mode},{},{},{runtime_ms:.3},{seed}", objectives.0, objectives.1)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.input)?;
    let partition = args.partition.as_deref().map(|p| read_json(p, "partition")).transpose()?;
    let frac = args.frac.as_deref().map(|p| read_json(p, "fractional solution")).transpose()?;
    let opts = solver_options(&args.flags, partition, frac);
    let start = Instant::now();
    let solved = algo::run(&inst, args.algo, &opts)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let objectives = algo::objectives(&inst, &solved)?;
    let seed = algo::seed_used(args.algo, &opts);
    let file = SolutionFile {
        iterations: solved.diagnostics.as_ref().map(|d| d.iterations),
        diagnostics: solved.diagnostics.clone(),
        assign: solved.assign.clone(),
        algo: Some(args.algo.name().to_string()),
        seed,
        sampler: algo::sampler_used(args.algo, &opts),
    };
    if let Some(out) = &args.out {
        emit(Some(out), &(serde_json::to_string_pretty(&file)? + "\n"))?;
    }
    let mode = algo::objective_mode_label(&inst, &solved);
    println!("{}", summary_line(args.algo.name(), mode, objectives, runtime_ms, seed));
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let inst = load_instance(&args.input)?;
    let frac: FractionalSolution = read_json(&args.frac, "fractional solution")?;
    let seq: Vec<FocalParams> = read_json(&args.seq, "focal sequence")?;
    let start = Instant::now();
    let config = avg_replay(&inst, &frac, &seq)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let solved = Solved { assign: config.rows().to_vec(), diagnostics: None, checked: true };
    let objectives = algo::objectives(&inst, &solved)?;
    let file = SolutionFile {
        assign: solved.assign.clone(),
        algo: Some("replay".into()),
        seed: None,
        sampler: None,
        iterations: Some(seq.len()),
        diagnostics: None,
    };
    if let Some(out) = &args.out {
        emit(Some(out), &(serde_json::to_string_pretty(&file)? + "\n"))?;
    }
    let mode = algo::objective_mode_label(&inst, &solved);
    println!("{}", summary_line("replay", mode, objectives, runtime_ms, None));
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let inst = load_instance(&args.input)?;
    let sol: SolutionFile = read_json(&args.sol, "solution")?;
    let report = metrics_unchecked(&inst, &RawAssignment { assign: sol.assign })?;
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!(UsageError(format!("empty seed range {text}")));
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}")))
        .collect()
}

const COMPARE_HEADER: [&str; 19] = [
    "algo",
    "seed",
    "mode",
    "objective_canonical",
    "objective_unit_sum",
    "runtime_ms",
    "lp_bound",
    "feasible",
    "personal_pct",
    "social_pct",
    "inter_pct",
    "intra_pct",
    "normalized_density",
    "codisplay_pct",
    "alone_pct",
    "mean_regret",
    "max_regret",
    "st_feasible",
    "st_violation_count",
];

fn compare_row(inst: &Instance, algo: Algo, opts: &SolveOptions, lp_bound: f64) -> Result<Vec<String>> {
    let start = Instant::now();
    let solved = algo::run(inst, algo, opts)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let (canonical, unit) = algo::objectives(inst, &solved)?;
    let m = metrics_unchecked(inst, &RawAssignment { assign: solved.assign.clone() })?.row();
    let opt = |v: Option<String>| v.unwrap_or_default();
    Ok(vec![
        algo.name().to_string(),
        opt(algo::seed_used(algo, opts).map(|s| s.to_string())),
        algo::objective_mode_label(inst, &solved).to_string(),
        canonical.to_string(),
        unit.to_string(),
        format!("{runtime_ms:.3}"),
        lp_bound.to_string(),
        m.feasible.to_string(),
        m.personal_pct.to_string(),
        m.social_pct.to_string(),
        m.inter_pct.to_string(),
        m.intra_pct.to_string(),
        m.normalized_density.to_string(),
        m.codisplay_pct.to_string(),
        m.alone_pct.to_string(),
        m.mean_regret.to_string(),
        m.max_regret.to_string(),
        opt(m.st_feasible.map(|b| b.to_string())),
        opt(m.st_violation_count.map(|c| c.to_string())),
    ])
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let inst = load_instance(&args.input)?;
    let algos: Vec<Algo> = args
        .algos
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: String| UsageError(e)))
        .collect::<std::result::Result<_, _>>()?;
    let seeds = parse_seeds(&args.seeds)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COMPARE_HEADER)?;
    if !algos.is_empty() {
        let lp_bound = algo::lp_bound(&inst)?;
        // Deterministic algorithms give one row regardless of the seed list.
        let jobs: Vec<(Algo, u64)> = algos
            .iter()
            .flat_map(|&a| {
                let probe = solver_options(&args.flags, None, None);
                let seeds: Vec<u64> = if algo::seed_used(a, &probe).is_some() { seeds.clone() } else { seeds[..1.min(seeds.len())].to_vec() };
                seeds.into_iter().map(move |s| (a, s))
            })
            .collect();
        let rows: Vec<Result<Vec<String>>> = jobs
            .par_iter()
            .map(|&(a, seed)| {
                let opts = SolveOptions { seed, ..solver_options(&args.flags, None, None) };
                compare_row(&inst, a, &opts, lp_bound)
            })
            .collect();
        for row in rows {
            writer.write_record(row?)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
    emit(args.out.as_deref(), std::str::from_utf8(&bytes)?)
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let inst = load_instance(&args.input)?;
    let scaled = scale_preferences(&inst)?;
    let model = match args.model {
        ModelKind::Full => build_full_lp(&scaled),
        ModelKind::Simp => build_simplified_lp(&scaled),
        ModelKind::St => build_st_lp(&scaled)?,
    };
    emit(args.out.as_deref(), &export_model(&model, matches!(args.integrality, Integrality::Binary)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
