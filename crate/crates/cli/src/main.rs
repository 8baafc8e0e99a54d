//! `smithian`: solve, run and analyse the signaling experiment.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unknown or
//! malformed plan entries), 2 on runtime failures.

mod cache;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, Parser, Subcommand};
use serde::Serialize;
use smithian_core::experiment::{run_traced, run_with_cache, trial_seed, ExperimentError, ExperimentPlan};
use smithian_core::par::Execution;
use smithian_core::stats::{summarize, write_figure2, StatsReport};
use smithian_core::wumpus::{read_trials, write_trace, write_trials, HunterModel};

/// Version tag written into every manifest.
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "smithian", version, about = "Pragmatic signaling experiments on a 3x3 Wumpus world")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Plan file: JSON, key=value lines, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    plan: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "SMITHIAN_OUT_DIR", default_value = "results")]
    out: PathBuf,

    /// Master seed of the trials. For `trace`, the seed of the single episode.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override one plan entry, e.g. `--override alpha=2`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Only report errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,

    /// More log output; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve and cache one policy per moving cost of the plan.
    Solve,
    /// Run every trial of the plan and write trials, statistics and plot data.
    Run {
        /// Also write per-step diagnostics of every trial to trace.csv.
        #[arg(long)]
        trace: bool,
    },
    /// Recompute stats.json from an existing trials file.
    Stats {
        /// Trials file; defaults to trials.csv in the output directory.
        #[arg(long)]
        trials: Option<PathBuf>,
    },
    /// Run one seeded episode and write its per-step diagnostics.
    Trace {
        #[arg(long)]
        condition: HunterModel,
        #[arg(long, allow_negative_numbers = true)]
        cost: f64,
    },
    /// Write figure2.csv from stats.json, or from trials.csv when no report exists.
    PlotData,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Run { .. } => "run",
            Command::Stats { .. } => "stats",
            Command::Trace { .. } => "trace",
            Command::PlotData => "plot-data",
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<ExperimentError>() {
            Some(ExperimentError::InvalidPlan(_) | ExperimentError::UnknownKey { .. }) => Failure::Usage(format!("{e:#}")),
            _ => Failure::Runtime(e),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        anyhow::Error::new(e).into()
    }
}

#[derive(Serialize)]
struct TraceRequest {
    condition: HunterModel,
    cost: f64,
    seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: u32,
    command: &'a str,
    plan: &'a ExperimentPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceRequest>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    init_logging(&cli);
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{}", Cli::command().render_usage());
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).parse_default_env().init();
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mut plan = resolve_plan(cli)?;
    plan.execution = configure_threads(cli.jobs)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let policies = cli.out.join("policies");
    let mut trace_request = None;

    match &cli.command {
        Command::Solve => {
            cache::policies_for(&policies, &plan)?;
        }
        Command::Run { trace } => {
            let cache = cache::policies_for(&policies, &plan)?;
            log::info!("running {} trials", plan.total_trials());
            let records = run_with_cache(&plan, &cache, *trace)?;
            write_file(&cli.out.join("trials.csv"), |w| Ok(write_trials(w, &records)?))?;
            if *trace {
                write_file(&cli.out.join("trace.csv"), |w| Ok(write_trace(w, &records)?))?;
            }
            let report = summarize(&records, &plan.stats_settings()).context("summarizing trials")?;
            write_report(&cli.out, &report)?;
        }
        Command::Stats { trials } => {
            let path = trials.clone().unwrap_or_else(|| cli.out.join("trials.csv"));
            let report = report_from_trials(&path, &plan)?;
            write_file(&cli.out.join("stats.json"), |w| Ok(w.write_all(report.to_json().as_bytes())?))?;
        }
        Command::Trace { condition, cost } => {
            let seed = cli.seed.unwrap_or_else(|| trial_seed(plan.master_seed, *condition, *cost, 0));
            let game = cache::load_or_solve(&policies, &plan.game_config(*cost), &plan.solver_config())?;
            let mut single = smithian_core::experiment::PolicyCache::default();
            single.insert(game);
            let record = run_traced(&plan, &single, *condition, *cost, seed)?;
            write_file(&cli.out.join("trace.csv"), |w| Ok(write_trace(w, std::slice::from_ref(&record))?))?;
            log::info!("episode finished after {} steps with reward {}", record.steps, record.total_reward);
            trace_request = Some(TraceRequest { condition: *condition, cost: *cost, seed });
        }
        Command::PlotData => {
            let stats = cli.out.join("stats.json");
            let report = if stats.exists() {
                let text = fs::read_to_string(&stats).with_context(|| format!("reading {}", stats.display()))?;
                StatsReport::from_json(&text).with_context(|| format!("parsing {}", stats.display()))?
            } else {
                report_from_trials(&cli.out.join("trials.csv"), &plan)?
            };
            write_file(&cli.out.join("figure2.csv"), |w| Ok(write_figure2(w, &report)?))?;
        }
    }

    let manifest = Manifest { version: MANIFEST_VERSION, command: cli.command.name(), plan: &plan, trace: trace_request };
    let text = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    write_file(&cli.out.join("manifest.json"), |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(())
}

/// Plan file (or, for commands that read earlier output, the manifest in
/// the output directory), then `--seed`, then `--override` entries in order.
fn resolve_plan(cli: &Cli) -> Result<ExperimentPlan, Failure> {
    let reads_earlier_output = matches!(cli.command, Command::Stats { .. } | Command::PlotData);
    let manifest = cli.out.join("manifest.json");
    let source = match &cli.plan {
        Some(p) => Some(p.clone()),
        None if reads_earlier_output && manifest.exists() => Some(manifest),
        None => None,
    };
    let mut plan = match &source {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
            ExperimentPlan::parse_text(&text)
                .map_err(|e| Failure::Usage(format!("plan {}: {e}", path.display())))?
        }
        None => ExperimentPlan::default(),
    };
    if let (Some(seed), false) = (cli.seed, matches!(cli.command, Command::Trace { .. })) {
        plan.master_seed = seed;
    }
    for entry in &cli.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("override '{entry}' is not of the form KEY=VALUE")))?;
        plan.apply_override(key, value)?;
    }
    plan.validate()?;
    Ok(plan)
}

fn configure_threads(jobs: Option<usize>) -> Result<Execution, Failure> {
    match jobs {
        None => Ok(Execution::default()),
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the worker pool")?;
            Ok(Execution::Parallel)
        }
    }
}

fn report_from_trials(path: &Path, plan: &ExperimentPlan) -> Result<StatsReport> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let records = read_trials(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    summarize(&records, &plan.stats_settings()).with_context(|| format!("summarizing {}", path.display()))
}

fn write_report(dir: &Path, report: &StatsReport) -> Result<()> {
    write_file(&dir.join("stats.json"), |w| Ok(w.write_all(report.to_json().as_bytes())?))?;
    write_file(&dir.join("figure2.csv"), |w| Ok(write_figure2(w, report)?))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}
