//! `pgfree`: construct, analyze and sweep binary point sets.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a check was violated,
//! 3 a resource cap was hit.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pgfree_core::constructions::{
    affine_set, bose_burton, complete_graph, direct_sum, graphic_representation, k5, GraphSpec,
};
use pgfree_core::structure::check_cone_bounds;
use pgfree_core::sweep::records_csv;
use pgfree_core::{
    analyze, cone, find_triangle_free_flat, run_sweep, run_sweep_with_workers, triangle_count_naive, walsh_hadamard,
    Check, Error, GfVector, PointSet, Rational, SearchLimit, Strategy, SweepConfig, SweepMode,
};

const WORKERS_ENV: &str = "PGFREE_WORKERS";

#[derive(Parser)]
#[command(name = "pgfree", version, about = "Dense PG(n-1,2)-free binary point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a point set and print it.
    Construct(ConstructArgs),
    /// Summarize a point set.
    Analyze(AnalyzeArgs),
    /// Walsh-Hadamard spectrum and uniformity.
    Spectrum(SpectrumArgs),
    /// Count ordered triangles.
    CountTriangles(CountArgs),
    /// Search for a triangle-free flat of corank n-2.
    FindFlat(FindFlatArgs),
    /// Sweep checks over many sets.
    Verify(VerifyArgs),
    /// Cone of a point.
    Cone(ConeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    BoseBurton,
    Affine,
    Graphic,
    K5,
    DirectSum,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Compact,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    rank: Option<u32>,
    #[arg(long)]
    level: Option<u32>,
    /// Normal of the excluded hyperplane for `affine`.
    #[arg(long, default_value = "1")]
    gamma: GfVector,
    /// Edge list file for `graphic`.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Complete graph on this many vertices for `graphic`.
    #[arg(long)]
    complete: Option<u32>,
    /// Operand files for `direct-sum`.
    #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
    operands: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct Limits {
    /// Abort any subspace search after this many seconds.
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Abort any subspace search after this many nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
}

impl Limits {
    fn limit(&self) -> SearchLimit {
        SearchLimit {
            max_nodes: self.max_nodes,
            deadline: self.timeout_secs.map(|s| Instant::now() + Duration::from_secs_f64(s)),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Point set file; stdin when absent.
    input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    levels: Vec<u32>,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args)]
struct SpectrumArgs {
    input: Option<PathBuf>,
    /// Number of largest nontrivial coefficients to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Also write the listed coefficients as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Naive,
    Spectral,
    Both,
}

#[derive(Args)]
struct CountArgs {
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    method: Method,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Descent,
    Exhaustive,
}

#[derive(Args)]
struct FindFlatArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    level: u32,
    #[arg(long, value_enum, default_value = "descent")]
    strategy: StrategyArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    rank: u32,
    #[arg(long)]
    level: u32,
    #[arg(long, value_enum, default_value = "random")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma separated check names; all checks when absent.
    #[arg(long)]
    checks: Option<String>,
    /// Keep only sets with density strictly above this rational, e.g. `5/8`.
    #[arg(long)]
    density_filter: Option<Rational>,
    /// Node budget for each subspace search.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Write the outcome JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write extremal records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConeArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    point: GfVector,
    /// Also check the cone bounds for this freeness level.
    #[arg(long)]
    level: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InternalInconsistency(_)) => 2,
        Some(Error::ResourceCap(_)) => 3,
        _ => 1,
    }
}

fn read_input(path: &Option<PathBuf>) -> anyhow::Result<PointSet> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("cannot read stdin")?;
            s
        }
    };
    let set = PointSet::parse_any(&text)?;
    Ok(set)
}

fn emit(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cmd: Command) -> anyhow::Result<u8> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Analyze(a) => {
            let set = read_input(&a.input)?;
            emit(&analyze(&set, &a.levels, a.limits.limit())?)?;
            Ok(0)
        }
        Command::Spectrum(a) => spectrum(a),
        Command::CountTriangles(a) => {
            let set = read_input(&a.input)?;
            let naive = matches!(a.method, Method::Naive | Method::Both).then(|| triangle_count_naive(&set));
            let spectral =
                matches!(a.method, Method::Spectral | Method::Both).then(|| walsh_hadamard(&set).triangle_count());
            if let (Some(x), Some(y)) = (naive, spectral) {
                if x != y {
                    return Err(Error::InternalInconsistency(format!(
                        "naive count {x} differs from spectral count {y}"
                    ))
                    .into());
                }
            }
            let ordered = naive.or(spectral).expect("one method runs");
            emit(&json!({
                "ordered": ordered,
                "triangles": ordered / 6,
                "naive": naive,
                "spectral": spectral,
            }))?;
            Ok(0)
        }
        Command::FindFlat(a) => {
            let set = read_input(&a.input)?;
            let strategy = match a.strategy {
                StrategyArg::Descent => Strategy::Descent,
                StrategyArg::Exhaustive => Strategy::Exhaustive,
            };
            let (result, trace) = find_triangle_free_flat(&set, a.level, strategy)?;
            emit(&json!({ "result": result, "trace": trace }))?;
            Ok(0)
        }
        Command::Verify(a) => verify(a),
        Command::Cone(a) => {
            let set = read_input(&a.input)?;
            let c = cone(&set, a.point)?;
            let report = match a.level {
                Some(n) => Some(check_cone_bounds(&set, a.point, n)?),
                None => None,
            };
            emit(&json!({ "point": a.point, "size": c.len(), "cone": c, "report": report }))?;
            Ok(0)
        }
    }
}

fn construct(a: ConstructArgs) -> anyhow::Result<u8> {
    let need = |v: Option<u32>, name: &str| v.with_context(|| format!("--{name} is required for this kind"));
    let set = match a.kind {
        Kind::BoseBurton => bose_burton(need(a.rank, "rank")?, need(a.level, "level")?)?,
        Kind::Affine => affine_set(need(a.rank, "rank")?, a.gamma)?,
        Kind::K5 => k5(),
        Kind::Graphic => {
            let graph = match (&a.edges, a.complete) {
                (Some(p), None) => {
                    let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                    GraphSpec::parse_edge_list(&text)?
                }
                (None, Some(k)) => complete_graph(k)?,
                _ => bail!("graphic needs exactly one of --edges or --complete"),
            };
            graphic_representation(&graph)?
        }
        Kind::DirectSum => {
            if a.operands.len() != 2 {
                bail!("direct-sum needs --operands LEFT RIGHT");
            }
            let left = read_input(&Some(a.operands[0].clone()))?;
            let right = read_input(&Some(a.operands[1].clone()))?;
            direct_sum(&left, &right)?
        }
    };
    match a.format {
        Format::Json => emit(&set)?,
        Format::Compact => println!("{}", set.to_compact()),
    }
    Ok(0)
}

fn spectrum(a: SpectrumArgs) -> anyhow::Result<u8> {
    let set = read_input(&a.input)?;
    let s = walsh_hadamard(&set);
    let u = s.uniformity();
    let mut order: Vec<(u32, i32)> = s
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(g, &c)| (g as u32, c))
        .collect();
    order.sort_by_key(|&(g, c)| (std::cmp::Reverse(c.unsigned_abs()), g));
    order.truncate(a.top);
    if let Some(path) = &a.csv {
        let mut text = String::from("gamma,coefficient\n");
        for &(g, c) in &order {
            text.push_str(&format!("{g},{c}\n"));
        }
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let top: Vec<_> = order
        .iter()
        .map(|&(g, c)| json!({ "gamma": g, "coefficient": c }))
        .collect();
    emit(&json!({
        "ambient_rank": set.rank(),
        "size": set.len(),
        "alpha": u.alpha,
        "epsilon_min": u.epsilon_min,
        "worst_gamma": u.worst_gamma,
        "energy": s.energy().to_string(),
        "triangle_count_ordered": s.triangle_count(),
        "top": top,
    }))?;
    Ok(0)
}

fn workers() -> anyhow::Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{WORKERS_ENV} must be a positive integer"))?;
            if n == 0 {
                bail!("{WORKERS_ENV} must be a positive integer");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn verify(a: VerifyArgs) -> anyhow::Result<u8> {
    let checks = match &a.checks {
        Some(text) => Check::parse_list(text)?,
        None => Check::ALL.to_vec(),
    };
    let cfg = SweepConfig {
        rank: a.rank,
        level: a.level,
        mode: match a.mode {
            ModeArg::Exhaustive => SweepMode::Exhaustive,
            ModeArg::Random => SweepMode::Random { samples: a.samples },
        },
        seed: a.seed,
        density_filter: a.density_filter,
        checks,
        search_budget: a.max_nodes,
    };
    let start = Instant::now();
    let outcome = match workers()? {
        Some(n) => run_sweep_with_workers(&cfg, n)?,
        None => run_sweep(&cfg)?,
    };
    eprintln!("sweep finished in {:.3} s", start.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&outcome)? + "\n";
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    if let Some(p) = &a.csv {
        fs::write(p, records_csv(&outcome)?).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let violations = outcome.total_violations();
    if violations > 0 {
        for (name, t) in &outcome.checks {
            if t.violations > 0 {
                eprintln!("{name}: {} violations, first {}", t.violations, t.counterexamples[0]);
            }
        }
        return Ok(2);
    }
    Ok(0)
}
