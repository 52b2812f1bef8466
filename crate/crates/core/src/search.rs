//! Iterated neighborhood search and its two-neighborhood alternation.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::distance::PlanMetricKind;
use crate::dp::{dp_search_with, DpOptions};
use crate::error::{MapfError, Result};
use crate::plan::{Instance, Plan};

/// One call of [`neighborhood_search`] inside a larger run.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub kind: PlanMetricKind,
    pub dp_calls: usize,
    pub start_makespan: usize,
    pub end_makespan: usize,
    pub states_created: usize,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub initial_makespan: usize,
    pub final_makespan: usize,
    /// Number of neighborhood DP calls.
    pub iterations: usize,
    /// Makespan of the initial plan followed by every accepted improvement.
    pub makespans: Vec<usize>,
    pub phases: Vec<PhaseReport>,
    pub metric_kinds: Vec<PlanMetricKind>,
    pub states_created: usize,
    /// Set when a DP call hit its state cap; the plan is the best found before.
    pub truncated: bool,
}

impl SearchReport {
    fn new(initial: usize) -> Self {
        SearchReport {
            initial_makespan: initial,
            final_makespan: initial,
            iterations: 0,
            makespans: vec![initial],
            phases: Vec::new(),
            metric_kinds: Vec::new(),
            states_created: 0,
            truncated: false,
        }
    }

    /// `final / initial`; an empty initial plan counts as ratio 1.
    pub fn reduction_ratio(&self) -> f64 {
        if self.initial_makespan == 0 {
            1.0
        } else {
            self.final_makespan as f64 / self.initial_makespan as f64
        }
    }

    pub fn wall_time(&self) -> Duration {
        self.phases.iter().map(|p| p.wall_time).sum()
    }

    fn absorb(&mut self, phase: SearchReport) {
        self.iterations += phase.iterations;
        self.makespans.extend_from_slice(&phase.makespans[1..]);
        self.final_makespan = phase.final_makespan;
        self.states_created += phase.states_created;
        self.truncated |= phase.truncated;
        for kind in phase.metric_kinds {
            if !self.metric_kinds.contains(&kind) {
                self.metric_kinds.push(kind);
            }
        }
        self.phases.extend(phase.phases);
    }
}

pub fn neighborhood_search(inst: &Instance, f0: &Plan, r: u64, kind: PlanMetricKind) -> Result<(Plan, SearchReport)> {
    neighborhood_search_with(inst, f0, r, kind, &DpOptions::default())
}

/// Replaces the plan by the shortest one in its neighborhood until that
/// stops shortening it.
pub fn neighborhood_search_with(
    inst: &Instance,
    f0: &Plan,
    r: u64,
    kind: PlanMetricKind,
    options: &DpOptions,
) -> Result<(Plan, SearchReport)> {
    inst.validate(f0)?;
    let clock = Instant::now();
    let mut report = SearchReport::new(f0.len());
    report.metric_kinds.push(kind);
    let mut current = f0.clone();
    loop {
        report.iterations += 1;
        let outcome = match dp_search_with(inst, &current, r, kind, options) {
            Ok(outcome) => outcome,
            Err(MapfError::BudgetExhausted(states)) => {
                log::warn!("{kind} search truncated after {states} states");
                report.states_created += states;
                report.truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        report.states_created += outcome.stats.states_created;
        match outcome.plan {
            Some(g) if g.len() < current.len() => {
                inst.validate(&g)?;
                log::debug!("{kind}: makespan {} -> {}", current.len(), g.len());
                report.makespans.push(g.len());
                current = g;
            }
            _ => break,
        }
    }
    report.final_makespan = current.len();
    report.phases.push(PhaseReport {
        kind,
        dp_calls: report.iterations,
        start_makespan: f0.len(),
        end_makespan: current.len(),
        states_created: report.states_created,
        wall_time: clock.elapsed(),
    });
    Ok((current, report))
}

#[derive(Clone, Debug)]
pub struct AlternationOptions {
    /// Neighborhoods applied in each outer pass, in order.
    pub order: Vec<PlanMetricKind>,
    pub dp: DpOptions,
}

impl Default for AlternationOptions {
    fn default() -> Self {
        AlternationOptions {
            order: vec![PlanMetricKind::UAgents, PlanMetricKind::SumMin],
            dp: DpOptions::default(),
        }
    }
}

pub fn alternated_search(inst: &Instance, f0: &Plan, r: u64) -> Result<(Plan, SearchReport)> {
    alternated_search_with(inst, f0, r, &AlternationOptions::default())
}

/// Runs a full neighborhood search per configured metric and repeats the
/// pass while it shortens the plan.
pub fn alternated_search_with(
    inst: &Instance,
    f0: &Plan,
    r: u64,
    options: &AlternationOptions,
) -> Result<(Plan, SearchReport)> {
    if options.order.is_empty() {
        return Err(MapfError::Parameter("alternation needs at least one metric".into()));
    }
    inst.validate(f0)?;
    let mut report = SearchReport::new(f0.len());
    let mut current = f0.clone();
    loop {
        let snapshot = current.len();
        for &kind in &options.order {
            let (next, phase) = neighborhood_search_with(inst, &current, r, kind, &options.dp)?;
            report.absorb(phase);
            current = next;
            if report.truncated {
                return Ok((current, report));
            }
        }
        if current.len() >= snapshot {
            break;
        }
    }
    Ok((current, report))
}
