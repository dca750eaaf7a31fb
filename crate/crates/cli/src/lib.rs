//! Command-line front end.
//!
//! Exit codes: 0 optimal (or success), 2 limit reached, 1 error, 64 usage.
//!
//! `solve --out DIR` writes:
//! - `report.json`: the run report (`schema: 1`), see [`inttsp::engine::RunReport`];
//! - `tour.txt`: the best tour, one vertex id per line, the first vertex not repeated;
//! - `pool.txt`: the final SEC pool, one `status origin v1 v2 ...` line per SEC.
//!
//! `experiment --out DIR` writes `runs.csv` (header `instance,n,variant,
//! sec_form,seed,seconds,iterations,constraints_final,objective,status`) and
//! `summary.csv`. `stats --out DIR` writes `cprime.csv` and
//! `cprime_distribution.csv`, plus `iterations.csv`, `lengths.csv` and
//! `subtour_curve.csv` unless `--cluster-only` is given.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use inttsp::backend::lp::{read_lp, write_solution};
use inttsp::backend::{Backend, CommandBackend, ReferenceBackend, SolveLimits, DEFAULT_CAP};
use inttsp::engine::{run as run_variant, RunReport, Variant, VariantConfig};
use inttsp::experiment::{run_stats, run_sweep, write_stats, write_sweep, StatsSpec, SweepSpec};
use inttsp::instances::{gen_mesh, gen_random_euclidean, parse_tsplib, render_explicit, Instance};
use inttsp::model::SecForm;
use inttsp::subtours::FilterKey;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "inttsp",
    version,
    about = "Exact TSP via iterated integer 2-matchings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Write a generated instance in TSPLIB explicit format.
    Generate(GenerateArgs),
    /// Parse a TSPLIB file and print a short summary.
    Parse(ParseArgs),
    /// Run variants over random instances and write runs.csv and summary.csv.
    Experiment(ExperimentArgs),
    /// Iteration, length, subtour-curve and cluster-count statistics.
    Stats(StatsArgs),
    /// Solve an LP file with the reference backend and write a solution file.
    #[command(hide = true)]
    LpSolve(LpSolveArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct InstanceArgs {
    /// TSPLIB file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Random Euclidean instance `N,SEED`.
    #[arg(long, value_parser = parse_pair)]
    random: Option<(usize, u64)>,
    /// 3 x COLS unit mesh.
    #[arg(long)]
    mesh: Option<usize>,
}

impl InstanceArgs {
    fn load(&self) -> anyhow::Result<Instance> {
        if let Some(path) = &self.instance {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return parse_tsplib(&text).with_context(|| format!("parsing {}", path.display()));
        }
        if let Some((n, seed)) = self.random {
            return Ok(gen_random_euclidean(n, seed)?);
        }
        if let Some(cols) = self.mesh {
            return Ok(gen_mesh(cols)?);
        }
        Err(anyhow!("no instance given"))
    }
}

#[derive(Debug, Clone)]
enum BackendSpec {
    Reference,
    Command(String),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "reference" {
            Ok(BackendSpec::Reference)
        } else if let Some(t) = s.strip_prefix("cmd:") {
            CommandBackend::new(t).map_err(|e| e.to_string())?;
            Ok(BackendSpec::Command(t.to_string()))
        } else {
            Err(format!("expected `reference` or `cmd:TEMPLATE`, got `{s}`"))
        }
    }
}

/// Settings shared by every subcommand that solves.
#[derive(Debug, Args)]
struct SolverArgs {
    /// `reference` or `cmd:TEMPLATE` with `{lp}`, `{sol}` and optional `{time}`.
    #[arg(long, default_value = "reference")]
    backend: BackendSpec,
    /// Largest n the reference backend accepts.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    reference_cap: usize,
    #[arg(long, default_value = "hybrid", value_parser = parse_from_str::<SecForm>)]
    sec_form: SecForm,
    /// Pass a heuristic tour to the backend.
    #[arg(long)]
    warm_start: bool,
    /// Do not add SECs for the backend's intermediate incumbents.
    #[arg(long)]
    no_incumbents: bool,
    /// Per-solve time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Solve independent clusters or instances in parallel.
    #[arg(long)]
    parallel: bool,
}

impl SolverArgs {
    fn backend(&self) -> Box<dyn Backend> {
        match &self.backend {
            BackendSpec::Reference => Box::new(ReferenceBackend::with_cap(self.reference_cap)),
            BackendSpec::Command(t) => {
                Box::new(CommandBackend::new(t.clone()).expect("validated by the parser"))
            }
        }
    }

    fn config(&self, variant: Variant) -> anyhow::Result<VariantConfig> {
        Ok(VariantConfig {
            variant,
            sec_form: self.sec_form,
            harvest_incumbents: !self.no_incumbents,
            warm_start: self.warm_start,
            limits: SolveLimits::new(self.time_limit, None)?,
            parallel: self.parallel,
            ..Default::default()
        })
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// basic, c:K, rc3:K, rc3n, hc[:U] or hcd[:U].
    #[arg(long, default_value = "basic", value_parser = parse_from_str::<Variant>)]
    variant: Variant,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed this fraction of all triangles as SECs before the first solve.
    #[arg(long, value_name = "P")]
    seed_triangles: Option<f64>,
    /// Keep only the smallest fraction of each iteration's subtours, `P,card` or `P,len`.
    #[arg(long, value_parser = parse_filter)]
    filter: Option<(f64, FilterKey)>,
    /// Output directory for report.json, tour.txt and pool.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParseArgs {
    file: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Instance sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Variants; the first is the baseline for time ratios.
    #[arg(long, value_delimiter = ',', default_value = "basic", value_parser = parse_from_str::<Variant>)]
    variants: Vec<Variant>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 100)]
    instances: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    /// Only count restricted clusters; nothing is solved.
    #[arg(long)]
    cluster_only: bool,
    /// Width of the rescaled iteration axis.
    #[arg(long, default_value_t = 10.0)]
    resolution: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LpSolveArgs {
    lp: PathBuf,
    sol: PathBuf,
    /// Time limit in seconds; 0 means none.
    time: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

fn parse_from_str<T: FromStr<Err = inttsp::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: inttsp::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, u64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `N,SEED`, got `{s}`"))?;
    let n = a.trim().parse().map_err(|_| format!("bad vertex count `{a}`"))?;
    let seed = b.trim().parse().map_err(|_| format!("bad seed `{b}`"))?;
    Ok((n, seed))
}

fn parse_filter(s: &str) -> Result<(f64, FilterKey), String> {
    let (p, key) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `P,card` or `P,len`, got `{s}`"))?;
    let p: f64 = p.trim().parse().map_err(|_| format!("bad fraction `{p}`"))?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(format!("filter fraction {p} outside (0, 1]"));
    }
    let key = match key.trim() {
        "card" => FilterKey::Cardinality,
        "len" => FilterKey::Length,
        other => return Err(format!("unknown filter key `{other}`")),
    };
    Ok((p, key))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Solve(a) => solve(a),
        Command::Generate(a) => generate(a),
        Command::Parse(a) => parse(a),
        Command::Experiment(a) => experiment(a),
        Command::Stats(a) => stats(a),
        Command::LpSolve(a) => lp_solve(a),
    }
}

fn solve(a: SolveArgs) -> anyhow::Result<i32> {
    let inst = a.instance.load()?;
    let mut cfg = a.solver.config(a.variant)?;
    if let Some(p) = a.seed_triangles {
        cfg.seed_triangles_p = p;
    }
    cfg.filter = a.filter;
    let backend = a.solver.backend();
    let report = run_variant(&inst, backend.as_ref(), &cfg)?;
    match &a.out {
        Some(dir) => write_report(dir, &report)?,
        None => println!("{}", report.to_json()),
    }
    eprintln!(
        "{} {} {:?}: objective {} in {} iterations, {} constraints, {:.3}s",
        report.instance,
        report.variant,
        report.status,
        report.objective.map_or("-".to_string(), |o| o.to_string()),
        report.iterations,
        report.constraints_final,
        report.seconds,
    );
    Ok(if report.is_optimal() { EXIT_OK } else { EXIT_LIMIT })
}

fn write_report(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("report.json"), report.to_json() + "\n")?;
    if let Some(tour) = &report.tour {
        let text: String = tour.order.iter().map(|v| format!("{v}\n")).collect();
        fs::write(dir.join("tour.txt"), text)?;
    }
    fs::write(dir.join("pool.txt"), &report.pool_dump)?;
    Ok(())
}

fn generate(a: GenerateArgs) -> anyhow::Result<i32> {
    let text = render_explicit(&a.instance.load()?);
    match a.out {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn parse(a: ParseArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let inst = parse_tsplib(&text)?;
    let summary = serde_json::json!({
        "name": inst.name(),
        "n": inst.n(),
        "source": inst.source(),
        "has_coords": inst.coords().is_some(),
        "weight_sum": inst.weights().iter().sum::<i64>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(EXIT_OK)
}

fn experiment(a: ExperimentArgs) -> anyhow::Result<i32> {
    let spec = SweepSpec {
        sizes: a.sizes,
        seeds: a.seeds,
        first_seed: a.first_seed,
        variants: a.variants.clone(),
        config: a.solver.config(a.variants[0])?,
    };
    let backend = a.solver.backend();
    let outcome = run_sweep(&spec, backend.as_ref())?;
    write_sweep(&a.out, &outcome)?;
    let failed = outcome.records.iter().filter(|r| r.status == "error").count();
    eprintln!(
        "{} runs, {failed} failed, written to {}",
        outcome.records.len(),
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn stats(a: StatsArgs) -> anyhow::Result<i32> {
    let spec = StatsSpec {
        sizes: a.sizes,
        instances: a.instances,
        first_seed: a.first_seed,
        cluster_only: a.cluster_only,
        config: a.solver.config(Variant::Basic)?,
        resolution: a.resolution,
    };
    let backend = a.solver.backend();
    let out = run_stats(&spec, backend.as_ref())?;
    write_stats(&a.out, &out, a.cluster_only)?;
    Ok(EXIT_OK)
}

fn lp_solve(a: LpSolveArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&a.lp).with_context(|| format!("reading {}", a.lp.display()))?;
    let model = read_lp(&text)?;
    let limit = a.time.filter(|&t| t > 0.0);
    let outcome = ReferenceBackend::with_cap(a.cap).solve(&model, None, &SolveLimits::new(limit, None)?)?;
    let chosen = outcome.best_solution.map(|s| s.chosen).unwrap_or_default();
    fs::write(&a.sol, write_solution(outcome.status, outcome.objective, &chosen))
        .with_context(|| format!("writing {}", a.sol.display()))?;
    Ok(EXIT_OK)
}
