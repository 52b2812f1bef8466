//! Configuration and plan distances.
//!
//! Path distances measure graph hops between the vertices agents occupy in
//! two plans; agent distances count agents whose positions differ. All plan
//! distances are asymmetric: `plan_distance(g, f, reference, kind)` is the
//! distance of `f` from `reference`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MapfError, Result};
use crate::graph::{DiGraph, Hops};
use crate::plan::{AgentAction, Configuration, Plan};

/// Sum over agents of the distance of `c1[p]` from `c2[p]`.
pub fn config_distance(graph: &DiGraph, c1: &Configuration, c2: &Configuration) -> Hops {
    debug_assert_eq!(c1.agent_count(), c2.agent_count());
    c1.positions()
        .iter()
        .zip(c2.positions())
        .map(|(&u, &v)| graph.vertex_distance(u, v))
        .sum()
}

/// Number of agents placed on different vertices.
pub fn config_agent_distance(c1: &Configuration, c2: &Configuration) -> usize {
    c1.positions()
        .iter()
        .zip(c2.positions())
        .filter(|(a, b)| a != b)
        .count()
}

/// A set of agent indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffAgentSet(BTreeSet<usize>);

impl DiffAgentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.contains(&agent)
    }

    pub fn insert(&mut self, agent: usize) -> bool {
        self.0.insert(agent)
    }

    pub fn is_subset(&self, other: &DiffAgentSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&mut self, other: &DiffAgentSet) {
        self.0.extend(other.0.iter().copied());
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for DiffAgentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        DiffAgentSet(iter.into_iter().collect())
    }
}

/// Agents on different vertices in the two configurations.
pub fn diff_agents(c1: &Configuration, c2: &Configuration) -> DiffAgentSet {
    c1.positions()
        .iter()
        .zip(c2.positions())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(p, _)| p)
        .collect()
}

/// Union of per-step differing agents over the given steps (clamped traces).
pub fn diff_agents_over_steps(f: &Plan, g: &Plan, steps: RangeInclusive<usize>) -> DiffAgentSet {
    let mut out = DiffAgentSet::new();
    for k in steps {
        out.union_with(&diff_agents(f.psi(k), g.psi(k)));
    }
    out
}

/// Agents whose position differs at some step `1..=max(|f|, |g|)`.
pub fn diff_agents_plans(f: &Plan, g: &Plan) -> DiffAgentSet {
    diff_agents_over_steps(f, g, 1..=f.len().max(g.len()))
}

/// Same set as [`diff_agents_plans`], computed from per-agent action
/// sequences padded with waits to a common length.
pub fn diff_agents_by_path_plans(f: &Plan, g: &Plan) -> DiffAgentSet {
    let horizon = f.len().max(g.len());
    let padded = |plan: &Plan, p: usize| {
        let mut actions = plan.path_plan(p);
        actions.resize(horizon, AgentAction::Wait);
        actions
    };
    (0..f.agent_count())
        .filter(|&p| padded(f, p) != padded(g, p))
        .collect()
}

/// The six plan distances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMetricKind {
    /// Max over common steps of the configuration distance.
    InfPath,
    /// Sum over common steps of the configuration distance.
    OnePath,
    /// Max over steps of the distance to the closest reference configuration.
    MaxMin,
    /// Sum over common steps of the distance to the closest reference configuration.
    SumMin,
    /// Number of agents whose path plans differ.
    UAgents,
    /// Max over steps of the number of displaced agents.
    MaxAgents,
}

impl PlanMetricKind {
    pub const ALL: [PlanMetricKind; 6] = [
        PlanMetricKind::InfPath,
        PlanMetricKind::OnePath,
        PlanMetricKind::MaxMin,
        PlanMetricKind::SumMin,
        PlanMetricKind::UAgents,
        PlanMetricKind::MaxAgents,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlanMetricKind::InfPath => "inf-path",
            PlanMetricKind::OnePath => "one-path",
            PlanMetricKind::MaxMin => "max-min",
            PlanMetricKind::SumMin => "sum-min",
            PlanMetricKind::UAgents => "u-agents",
            PlanMetricKind::MaxAgents => "max-agents",
        }
    }

    pub fn is_path_metric(self) -> bool {
        !matches!(self, PlanMetricKind::UAgents | PlanMetricKind::MaxAgents)
    }
}

impl fmt::Display for PlanMetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlanMetricKind {
    type Err = MapfError;

    fn from_str(s: &str) -> Result<Self> {
        PlanMetricKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MapfError::Parameter(format!("unknown metric `{s}`")))
    }
}

/// Aggregates a path metric from a cross-distance oracle.
///
/// `cross(k, h)` must return the configuration distance of the first plan's
/// configuration at step `k` from the second plan's configuration at step
/// `h`, both clamped past the plan ends. Per-step minima range over
/// `h in 0..=max(len_f, len_g)`, which covers every configuration of the
/// second plan.
///
/// # Panics
/// When `kind` is an agent metric.
pub fn aggregate_path_metric<F>(kind: PlanMetricKind, len_f: usize, len_g: usize, cross: F) -> Hops
where
    F: Fn(usize, usize) -> Hops,
{
    let common = len_f.min(len_g);
    let horizon = len_f.max(len_g);
    let closest = |k: usize| (0..=horizon).map(|h| cross(k, h)).min().unwrap_or(Hops::ZERO);
    match kind {
        PlanMetricKind::InfPath => (1..=common).map(|k| cross(k, k)).max().unwrap_or(Hops::ZERO),
        PlanMetricKind::OnePath => (1..=common).map(|k| cross(k, k)).sum(),
        PlanMetricKind::MaxMin => (1..=horizon).map(closest).max().unwrap_or(Hops::ZERO),
        PlanMetricKind::SumMin => (1..=common).map(closest).sum(),
        PlanMetricKind::UAgents | PlanMetricKind::MaxAgents => {
            panic!("{kind} is not a path metric")
        }
    }
}

/// Distance of a configuration from the closest configuration of `reference`.
pub fn distance_to_plan(graph: &DiGraph, config: &Configuration, reference: &Plan) -> Hops {
    reference
        .trace()
        .iter()
        .map(|c| config_distance(graph, config, c))
        .min()
        .unwrap_or(Hops::ZERO)
}

/// Distance of plan `f` from plan `reference` under `kind`.
///
/// Both plans must share the start configuration.
pub fn plan_distance(graph: &DiGraph, f: &Plan, reference: &Plan, kind: PlanMetricKind) -> Result<Hops> {
    if f.agent_count() != reference.agent_count() {
        return Err(MapfError::AgentCountMismatch {
            expected: reference.agent_count(),
            found: f.agent_count(),
        });
    }
    if f.start() != reference.start() {
        return Err(MapfError::StartMismatch);
    }
    let value = match kind {
        PlanMetricKind::UAgents => Hops::Finite(diff_agents_plans(f, reference).len() as u64),
        PlanMetricKind::MaxAgents => {
            let horizon = f.len().max(reference.len());
            let worst = (1..=horizon)
                .map(|k| config_agent_distance(f.psi(k), reference.psi(k)))
                .max()
                .unwrap_or(0);
            Hops::Finite(worst as u64)
        }
        _ => aggregate_path_metric(kind, f.len(), reference.len(), |k, h| {
            config_distance(graph, f.psi(k), reference.psi(h))
        }),
    };
    Ok(value)
}
