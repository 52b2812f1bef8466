//! Experiment harness: random instances, initial plans, improvement runs
//! and CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::PlanMetricKind;
use crate::error::{MapfError, Result};
use crate::init::{generate_instance, prioritized_initial, sequential_initial};
use crate::plan::{Instance, Plan};
use crate::search::{alternated_search, neighborhood_search, SearchReport};

/// Seeds tried per requested instance before a cell gives up.
pub const ATTEMPTS_PER_INSTANCE: usize = 20;
/// Priority-order restarts granted to the initial planner.
pub const INITIALIZER_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    SumMin,
    UAgents,
    Alternate,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::SumMin, RunMode::UAgents, RunMode::Alternate];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::SumMin => "sum-min",
            RunMode::UAgents => "u-agents",
            RunMode::Alternate => "alternate",
        }
    }

    pub fn run(self, inst: &Instance, f0: &Plan, r: u64) -> Result<(Plan, SearchReport)> {
        match self {
            RunMode::SumMin => neighborhood_search(inst, f0, r, PlanMetricKind::SumMin),
            RunMode::UAgents => neighborhood_search(inst, f0, r, PlanMetricKind::UAgents),
            RunMode::Alternate => alternated_search(inst, f0, r),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = MapfError;

    fn from_str(s: &str) -> Result<Self> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MapfError::Parameter(format!("unknown run mode {s:?}")))
    }
}

/// Source of the plans handed to the local search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitializerKind {
    #[default]
    Prioritized,
    Sequential,
}

impl InitializerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitializerKind::Prioritized => "prioritized",
            InitializerKind::Sequential => "sequential",
        }
    }

    pub fn plan(self, inst: &Instance, seed: u64, retries: usize) -> Result<Plan> {
        match self {
            InitializerKind::Prioritized => prioritized_initial(inst, seed, retries),
            InitializerKind::Sequential => sequential_initial(inst, seed, retries),
        }
    }
}

impl FromStr for InitializerKind {
    type Err = MapfError;

    fn from_str(s: &str) -> Result<Self> {
        [InitializerKind::Prioritized, InitializerKind::Sequential]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MapfError::Parameter(format!("unknown initializer {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub node_counts: Vec<usize>,
    pub agent_counts: Vec<usize>,
    pub instances_per_cell: usize,
    pub radius: u64,
    pub metrics: Vec<RunMode>,
    pub base_seed: u64,
    #[serde(default)]
    pub initializer: InitializerKind,
}

impl ExperimentGrid {
    /// Small grid that finishes in minutes on a laptop.
    pub fn desk() -> Self {
        ExperimentGrid {
            node_counts: vec![20, 30, 40],
            agent_counts: vec![5, 10, 15],
            instances_per_cell: 10,
            radius: 1,
            metrics: RunMode::ALL.to_vec(),
            base_seed: 0,
            initializer: InitializerKind::Prioritized,
        }
    }

    /// 20..=100 nodes by 10 and 2..=18 agents by 2.
    pub fn full() -> Self {
        ExperimentGrid {
            node_counts: (20..=100).step_by(10).collect(),
            agent_counts: (2..=18).step_by(2).collect(),
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MapfError::Parameter(msg.into()));
        if self.node_counts.is_empty() || self.agent_counts.is_empty() || self.metrics.is_empty() {
            return bad("grid needs node counts, agent counts and metrics");
        }
        if self.node_counts.contains(&0) || self.agent_counts.contains(&0) {
            return bad("node and agent counts must be positive");
        }
        if self.instances_per_cell == 0 {
            return bad("instances_per_cell must be positive");
        }
        if self.radius == 0 {
            return bad("radius must be at least 1");
        }
        for &n in &self.node_counts {
            for &p in &self.agent_counts {
                if p + 2 > n {
                    return Err(MapfError::Parameter(format!(
                        "cell ({n} nodes, {p} agents) leaves fewer than two free vertices"
                    )));
                }
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize)> {
        self.node_counts
            .iter()
            .flat_map(|&n| self.agent_counts.iter().map(move |&p| (n, p)))
            .collect()
    }
}

/// Deterministic seed for the `attempt`-th draw of a cell.
pub fn cell_seed(base: u64, nodes: usize, agents: usize, attempt: usize) -> u64 {
    let mut x = base ^ ((nodes as u64) << 40) ^ ((agents as u64) << 24) ^ attempt as u64;
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One CSV row. Result columns are empty when the initializer failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub agents: usize,
    pub seed: u64,
    pub metric: RunMode,
    pub initial_len: Option<usize>,
    pub final_len: Option<usize>,
    pub ratio: Option<f64>,
    pub iterations: Option<usize>,
    pub dp_states_created: Option<usize>,
    pub wall_seconds: Option<f64>,
    pub initializer_discarded: bool,
}

impl BenchRow {
    /// Row for a single improvement run outside the grid.
    pub fn for_run(inst: &Instance, f0: &Plan, plan: &Plan, mode: RunMode, report: &SearchReport, wall_seconds: f64) -> Self {
        let mut row = BenchRow {
            nodes: inst.graph.node_count(),
            agents: inst.agent_count(),
            seed: inst.seed.unwrap_or(0),
            metric: mode,
            initial_len: None,
            final_len: None,
            ratio: None,
            iterations: None,
            dp_states_created: None,
            wall_seconds: None,
            initializer_discarded: false,
        };
        row.record(f0, plan, report, wall_seconds);
        row
    }

    fn record(&mut self, f0: &Plan, plan: &Plan, report: &SearchReport, wall_seconds: f64) {
        self.initial_len = Some(f0.len());
        self.final_len = Some(plan.len());
        self.ratio = Some(report.reduction_ratio());
        self.iterations = Some(report.iterations);
        self.dp_states_created = Some(report.states_created);
        self.wall_seconds = Some(wall_seconds);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub nodes: usize,
    pub agents: usize,
    pub metric: RunMode,
    pub instances: usize,
    pub discarded: usize,
    pub mean_ratio: Option<f64>,
    pub mean_wall_seconds: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<CellSummary>,
}

impl BenchResult {
    pub fn cell(&self, nodes: usize, agents: usize, metric: RunMode) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|s| s.nodes == nodes && s.agents == agents && s.metric == metric)
    }
}

struct Job {
    nodes: usize,
    agents: usize,
    seed: u64,
    instance: Option<(Instance, Plan)>,
}

fn draw_cell(grid: &ExperimentGrid, nodes: usize, agents: usize) -> Vec<Job> {
    let mut jobs = Vec::new();
    let mut found = 0;
    for attempt in 0..grid.instances_per_cell * ATTEMPTS_PER_INSTANCE {
        if found == grid.instances_per_cell {
            break;
        }
        let seed = cell_seed(grid.base_seed, nodes, agents, attempt);
        let instance = generate_instance(nodes, agents, seed)
            .and_then(|inst| {
                grid.initializer
                    .plan(&inst, seed, INITIALIZER_RETRIES)
                    .map(|f0| (inst, f0))
            })
            .map_err(|e| log::info!("cell ({nodes}, {agents}) seed {seed} discarded: {e}"))
            .ok();
        found += usize::from(instance.is_some());
        jobs.push(Job {
            nodes,
            agents,
            seed,
            instance,
        });
    }
    if found < grid.instances_per_cell {
        log::warn!("cell ({nodes}, {agents}) yielded {found} of {} instances", grid.instances_per_cell);
    }
    jobs
}

fn run_job(job: &Job, mode: RunMode, radius: u64) -> Result<BenchRow> {
    let mut row = BenchRow {
        nodes: job.nodes,
        agents: job.agents,
        seed: job.seed,
        metric: mode,
        initial_len: None,
        final_len: None,
        ratio: None,
        iterations: None,
        dp_states_created: None,
        wall_seconds: None,
        initializer_discarded: job.instance.is_none(),
    };
    if let Some((inst, f0)) = &job.instance {
        let clock = Instant::now();
        let (plan, report) = mode.run(inst, f0, radius)?;
        let wall = clock.elapsed().as_secs_f64();
        if report.truncated {
            log::warn!("{mode} run on seed {} hit the state cap", job.seed);
        }
        row.record(f0, &plan, &report, wall);
    }
    Ok(row)
}

fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(usize, usize, RunMode), Vec<&BenchRow>> = BTreeMap::new();
    for row in rows {
        cells.entry((row.nodes, row.agents, row.metric)).or_default().push(row);
    }
    cells
        .into_iter()
        .map(|((nodes, agents, metric), rows)| {
            let done: Vec<&&BenchRow> = rows.iter().filter(|r| !r.initializer_discarded).collect();
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                (!done.is_empty()).then(|| done.iter().map(|r| f(r)).sum::<f64>() / done.len() as f64)
            };
            CellSummary {
                nodes,
                agents,
                metric,
                instances: done.len(),
                discarded: rows.len() - done.len(),
                mean_ratio: mean(&|r| r.ratio.unwrap_or(1.0)),
                mean_wall_seconds: mean(&|r| r.wall_seconds.unwrap_or(0.0)),
            }
        })
        .collect()
}

/// Runs every (cell, instance, metric) combination on up to `jobs` threads.
/// Rows come back sorted by cell, seed and metric regardless of scheduling.
pub fn run_bench(grid: &ExperimentGrid, jobs: usize) -> Result<BenchResult> {
    grid.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| MapfError::Parameter(e.to_string()))?;
    pool.install(|| {
        let work: Vec<Job> = grid
            .cells()
            .par_iter()
            .flat_map_iter(|&(n, p)| draw_cell(grid, n, p))
            .collect();
        let tasks: Vec<(&Job, RunMode)> = work
            .iter()
            .flat_map(|job| grid.metrics.iter().map(move |&m| (job, m)))
            .collect();
        let mut rows = tasks
            .par_iter()
            .map(|&(job, mode)| run_job(job, mode, grid.radius))
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|a, b| {
            (a.nodes, a.agents, a.seed, a.metric).cmp(&(b.nodes, b.agents, b.seed, b.metric))
        });
        let summary = summarize(&rows);
        Ok(BenchResult { rows, summary })
    })
}

pub fn write_rows_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(summary: &[CellSummary], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for cell in summary {
        writer.serialize(cell)?;
    }
    writer.flush()?;
    Ok(())
}
