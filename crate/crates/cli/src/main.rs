use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mapf_core::bench::{run_bench, write_rows_csv, write_summary_csv, BenchRow, ExperimentGrid, InitializerKind, RunMode};
use mapf_core::format::{read_instance, read_plan, write_instance, write_plan};
use mapf_core::{generate_instance, plan_distance, Instance, MapfError, Plan, PlanMetricKind};

#[derive(Parser)]
#[command(name = "mapf", version, about = "Shorten multi-agent path finding plans by neighborhood search")]
struct Cli {
    /// Log verbosity; repeat for more (-vvv prints one line per search state).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance on a strongly connected graph with 4n edges.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute an initial feasible plan.
    Init {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        retries: usize,
        #[arg(long, default_value = "prioritized")]
        initializer: InitializerKind,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Improve a plan by local search and print a report row.
    Improve {
        instance: PathBuf,
        /// Plan to improve; mutually exclusive with --init.
        #[arg(long, conflicts_with = "init", required_unless_present = "init")]
        plan: Option<PathBuf>,
        /// Start from a freshly computed prioritized plan.
        #[arg(long)]
        init: bool,
        #[arg(long, default_value = "alternate")]
        metric: RunMode,
        #[arg(long, default_value_t = 1)]
        radius: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the full report as JSON instead of a CSV row.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment grid and write one CSV row per run.
    Bench {
        /// Grid description as JSON; defaults to the desk grid.
        #[arg(long, conflicts_with = "full")]
        grid: Option<PathBuf>,
        /// Use the full 20..100 node, 2..18 agent grid.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        initializer: Option<InitializerKind>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Rows go to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-cell means.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Check that a plan solves an instance.
    Validate { instance: PathBuf, plan: PathBuf },
    /// Distances of a plan from a reference plan.
    Dist {
        instance: PathBuf,
        plan: PathBuf,
        reference: PathBuf,
        /// One metric; all six when omitted.
        #[arg(long)]
        metric: Option<PlanMetricKind>,
    },
}

enum Failure {
    Validation(String),
    Parameter(String),
    Budget(String),
}

impl From<MapfError> for Failure {
    fn from(e: MapfError) -> Self {
        match e {
            MapfError::BudgetExhausted(_) => Failure::Budget(e.to_string()),
            MapfError::Parameter(_) | MapfError::Io(_) | MapfError::InitializerFailed(_) => Failure::Parameter(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Parameter(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_pair(instance: &Path, plan: &Path) -> Result<(Instance, Plan), Failure> {
    let inst = read_instance(instance)?;
    let plan = read_plan(&inst.graph, plan)?;
    Ok((inst, plan))
}

fn gen(nodes: usize, agents: usize, seed: u64, output: &Path) -> Outcome {
    let inst = generate_instance(nodes, agents, seed)?;
    write_instance(output, &inst)?;
    Ok(())
}

fn init(instance: &Path, seed: u64, retries: usize, initializer: InitializerKind, output: &Path) -> Outcome {
    let inst = read_instance(instance)?;
    let plan = initializer.plan(&inst, seed, retries)?;
    write_plan(output, &plan)?;
    println!("makespan {}", plan.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn improve(
    instance: &Path,
    plan: Option<&Path>,
    seed: u64,
    metric: RunMode,
    radius: u64,
    json: bool,
    output: Option<&Path>,
) -> Outcome {
    if radius == 0 {
        return Err(Failure::Parameter("radius must be at least 1".into()));
    }
    let inst = read_instance(instance)?;
    let f0 = match plan {
        Some(path) => {
            let f0 = read_plan(&inst.graph, path)?;
            inst.validate(&f0)?;
            f0
        }
        None => mapf_core::prioritized_initial(&inst, seed, 10)?,
    };
    let clock = Instant::now();
    let (best, report) = metric.run(&inst, &f0, radius)?;
    let wall = clock.elapsed().as_secs_f64();
    inst.validate(&best)?;
    if let Some(path) = output {
        write_plan(path, &best)?;
    }
    if json {
        let mut value = serde_json::to_value(&report).map_err(|e| Failure::Parameter(e.to_string()))?;
        value["reduction_ratio"] = report.reduction_ratio().into();
        value["wall_seconds"] = wall.into();
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
    } else {
        let row = BenchRow::for_run(&inst, &f0, &best, metric, &report, wall);
        write_rows_csv(&[row], io::stdout().lock())?;
    }
    if report.truncated {
        return Err(Failure::Budget("a neighborhood search hit its state cap; the written plan is the best found".into()));
    }
    Ok(())
}

fn bench(
    grid: Option<&Path>,
    full: bool,
    initializer: Option<InitializerKind>,
    jobs: usize,
    output: Option<&Path>,
    summary: Option<&Path>,
) -> Outcome {
    let mut grid = match grid {
        Some(path) => serde_json::from_reader(File::open(path)?).map_err(|e| Failure::Parameter(format!("{}: {e}", path.display())))?,
        None if full => {
            log::warn!("the full grid runs 81 cells and can take hours");
            ExperimentGrid::full()
        }
        None => ExperimentGrid::desk(),
    };
    if let Some(kind) = initializer {
        grid.initializer = kind;
    }
    let result = run_bench(&grid, jobs)?;
    match output {
        Some(path) => write_rows_csv(&result.rows, BufWriter::new(File::create(path)?))?,
        None => write_rows_csv(&result.rows, io::stdout().lock())?,
    }
    match summary {
        Some(path) => write_summary_csv(&result.summary, BufWriter::new(File::create(path)?))?,
        None => write_summary_csv(&result.summary, io::stderr().lock())?,
    }
    Ok(())
}

fn validate(instance: &Path, plan: &Path) -> Outcome {
    let (inst, plan) = load_pair(instance, plan)?;
    inst.validate(&plan)?;
    println!("valid, makespan {}", plan.len());
    Ok(())
}

fn dist(instance: &Path, plan: &Path, reference: &Path, metric: Option<PlanMetricKind>) -> Outcome {
    let (inst, f) = load_pair(instance, plan)?;
    let reference = read_plan(&inst.graph, reference)?;
    let kinds = metric.map_or(PlanMetricKind::ALL.to_vec(), |k| vec![k]);
    for kind in kinds {
        println!("{kind} {}", plan_distance(&inst.graph, &f, &reference, kind)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    let outcome = match &cli.command {
        Command::Gen {
            nodes,
            agents,
            seed,
            output,
        } => gen(*nodes, *agents, *seed, output),
        Command::Init {
            instance,
            seed,
            retries,
            initializer,
            output,
        } => init(instance, *seed, *retries, *initializer, output),
        Command::Improve {
            instance,
            plan,
            init: _,
            metric,
            radius,
            seed,
            json,
            output,
        } => improve(instance, plan.as_deref(), *seed, *metric, *radius, *json, output.as_deref()),
        Command::Bench {
            grid,
            full,
            initializer,
            jobs,
            output,
            summary,
        } => bench(grid.as_deref(), *full, *initializer, *jobs, output.as_deref(), summary.as_deref()),
        Command::Validate { instance, plan } => validate(instance, plan),
        Command::Dist {
            instance,
            plan,
            reference,
            metric,
        } => dist(instance, plan, reference, *metric),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("invalid: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Parameter(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exhausted: {msg}");
            ExitCode::from(3)
        }
    }
}
