//! `fieldnav` — command-line harness around the navigation stack.
//!
//! Subcommands: `plan` (scenario -> tour.txt), `run` (scenario ->
//! runlog.csv + tour.txt), `metrics` (runlog.csv -> metrics.csv +
//! histogram.csv), `batch` (scenario template x seed list). Exit code 0 on
//! success, nonzero with a one-line reason otherwise.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fieldnav::metrics::{compute_metrics, histogram_csv, metrics_csv};
use fieldnav::planners::PlannerKind;
use fieldnav::roadmap::goal_graph;
use fieldnav::rng::stream;
use fieldnav::runlog::RunLog;
use fieldnav::scenario::{load_scenario, Scenario};
use fieldnav::sim::{build_world, plan_free_end_tour, resolved_poses, run_scenario};
use fieldnav::tour::Tour;

#[derive(Parser)]
#[command(
    name = "fieldnav",
    version,
    about = "Energy- and crowd-aware navigation: plan tours, run simulations, compute metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the goal tour offline and write tour.txt
    Plan(ScenarioArgs),
    /// Run the closed-loop simulation and write runlog.csv and tour.txt
    Run(ScenarioArgs),
    /// Compute metrics from a run log and write metrics.csv and histogram.csv
    Metrics(MetricsArgs),
    /// Run one scenario across a list of seeds, writing one run log each
    Batch(BatchArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's local planner
    #[arg(long, value_parser = planner_kind)]
    planner: Option<PlannerKind>,
    /// Override the run duration (s)
    #[arg(long)]
    duration: Option<f64>,
    /// Override the local planner's iteration budget
    #[arg(long)]
    budget_iters: Option<usize>,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Run log CSV produced by `run` or `batch`
    #[arg(long)]
    runlog: PathBuf,
    /// Robot disc radius (m) for surface-clearance conversion
    #[arg(long, default_value_t = 1.5)]
    robot_radius: f64,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Seed list: either `a..b` (inclusive) or comma-separated values
    #[arg(long)]
    seeds: String,
}

fn planner_kind(name: &str) -> Result<PlannerKind, String> {
    PlannerKind::parse(name).ok_or_else(|| format!("unknown planner `{name}` (mcts|pf|fs)"))
}

fn load_with_overrides(args: &ScenarioArgs) -> Result<Scenario> {
    let mut scenario = load_scenario(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    if let Some(seed) = args.seed {
        scenario.run.seed = seed;
    }
    if let Some(planner) = args.planner {
        scenario.planner.kind = planner;
    }
    if let Some(duration) = args.duration {
        scenario.run.duration = duration;
    }
    if let Some(budget) = args.budget_iters {
        scenario.planner.budget_iters = budget;
    }
    Ok(scenario)
}

/// Seed list grammar: `a..b` is inclusive on both ends; otherwise a
/// comma-separated list of integers.
fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().context("range start")?;
        let b: u64 = b.trim().parse().context("range end")?;
        if a > b {
            bail!("empty seed range {a}..{b}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("seed `{s}`")))
        .collect()
}

/// Human-and-machine-readable tour summary.
fn tour_text(tour: &Tour) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "total_cost_j {}", tour.total_cost);
    let order: Vec<String> = tour.order.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "order {}", order.join(" "));
    for (k, (&v, &s)) in tour.order.iter().zip(&tour.goal_s).enumerate() {
        let _ = writeln!(out, "stop {k} vertex {v} s {s}");
    }
    let _ = writeln!(out, "polyline {}", tour.polyline.len());
    for p in &tour.polyline {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_plan(args: &ScenarioArgs) -> Result<()> {
    let scenario = load_with_overrides(args)?;
    let world = build_world(&scenario)?;
    let poses = resolved_poses(&scenario);
    let mut rng = stream(scenario.run.seed, "prm", 0);
    let roadmap =
        fieldnav::roadmap::generate_roadmap(&world, &poses, &scenario.goals.prm, &mut rng)?;
    let graph = goal_graph(&roadmap)?;
    let tour = plan_free_end_tour(&graph)?;
    let path = write_file(&args.out, "tour.txt", &tour_text(&tour))?;
    println!(
        "planned {} stops, cost {:.1} J, polyline {} points -> {}",
        tour.order.len(),
        tour.total_cost,
        tour.polyline.len(),
        path.display()
    );
    Ok(())
}

fn cmd_run(args: &ScenarioArgs) -> Result<()> {
    let scenario = load_with_overrides(args)?;
    let result = run_scenario(&scenario)?;
    let log_path = write_file(&args.out, "runlog.csv", &result.log.to_csv())?;
    write_file(&args.out, "tour.txt", &tour_text(&result.tour))?;
    let ticks = result.log.records.len();
    let end_t = result.log.records.last().map(|r| r.t).unwrap_or(0.0);
    println!(
        "ran {} ticks ({:.1} s sim), energy {:.1} J, planner {} -> {}",
        ticks,
        end_t,
        result.total_energy_j,
        scenario.planner.kind.name(),
        log_path.display()
    );
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.runlog)
        .with_context(|| format!("reading {}", args.runlog.display()))?;
    let log = RunLog::from_csv(&text)?;
    let report = compute_metrics(&log, args.robot_radius)?;
    let metrics_path = write_file(&args.out, "metrics.csv", &metrics_csv(&report))?;
    write_file(&args.out, "histogram.csv", &histogram_csv(&report))?;
    println!(
        "{} ticks, {} windows -> {}",
        log.records.len(),
        report.windows.len(),
        metrics_path.display()
    );
    Ok(())
}

fn cmd_batch(args: &BatchArgs) -> Result<()> {
    let seeds = parse_seeds(&args.seeds)?;
    let base = load_with_overrides(&args.scenario)?;
    for &seed in &seeds {
        let mut scenario = base.clone();
        scenario.run.seed = seed;
        let result = run_scenario(&scenario)?;
        let name = format!("runlog-{}-seed{}.csv", scenario.planner.kind.name(), seed);
        let path = write_file(&args.scenario.out, &name, &result.log.to_csv())?;
        println!(
            "seed {}: {} ticks, energy {:.1} J -> {}",
            seed,
            result.log.records.len(),
            result.total_energy_j,
            path.display()
        );
    }
    println!("batch done: {} runs", seeds.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Run(args) => cmd_run(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Batch(args) => cmd_batch(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
