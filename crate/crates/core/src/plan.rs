//! Configurations, fleet actions, the transition function and plans.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MapfError, Result};
use crate::graph::{DiGraph, Vertex};

/// Injective assignment of agents to vertices; agent `i` sits on `self[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<Vertex>);

impl Configuration {
    pub fn new(positions: Vec<Vertex>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(positions.len());
        for &v in &positions {
            if !seen.insert(v) {
                return Err(MapfError::NotInjective(v.index()));
            }
        }
        Ok(Configuration(positions))
    }

    pub fn from_indices(positions: &[usize]) -> Result<Self> {
        Self::new(positions.iter().map(|&v| Vertex::from(v)).collect())
    }

    /// Wraps positions already known to be injective.
    pub(crate) fn from_vec_unchecked(positions: Vec<Vertex>) -> Self {
        debug_assert!(Self::new(positions.clone()).is_ok());
        Configuration(positions)
    }

    pub fn agent_count(&self) -> usize {
        self.0.len()
    }

    pub fn positions(&self) -> &[Vertex] {
        &self.0
    }

    pub fn position(&self, agent: usize) -> Vertex {
        self.0[agent]
    }

    /// Checks that every position is a vertex of `graph`.
    pub fn check_on(&self, graph: &DiGraph) -> Result<()> {
        for &v in &self.0 {
            if !graph.contains(v) {
                return Err(MapfError::VertexOutOfRange {
                    vertex: v.index(),
                    node_count: graph.node_count(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentAction {
    Wait,
    Move { from: Vertex, to: Vertex },
}

/// One action per agent, applied simultaneously.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FleetAction(pub Vec<AgentAction>);

impl FleetAction {
    pub fn wait(agent_count: usize) -> Self {
        FleetAction(vec![AgentAction::Wait; agent_count])
    }

    pub fn actions(&self) -> &[AgentAction] {
        &self.0
    }

    /// Action that turns `from` into `to`, agent by agent. No validity check.
    pub fn between(from: &Configuration, to: &Configuration) -> Self {
        FleetAction(
            from.positions()
                .iter()
                .zip(to.positions())
                .map(|(&a, &b)| {
                    if a == b {
                        AgentAction::Wait
                    } else {
                        AgentAction::Move { from: a, to: b }
                    }
                })
                .collect(),
        )
    }
}

/// Why a fleet action cannot be applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepViolation {
    ArityMismatch,
    WrongOrigin { agent: usize },
    MissingEdge { agent: usize },
    Collision { vertex: Vertex },
    Swap { first: usize, second: usize },
}

impl fmt::Display for StepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepViolation::ArityMismatch => write!(f, "action count differs from agent count"),
            StepViolation::WrongOrigin { agent } => {
                write!(f, "agent {agent} moves from a vertex it does not occupy")
            }
            StepViolation::MissingEdge { agent } => write!(f, "agent {agent} uses a missing edge"),
            StepViolation::Collision { vertex } => {
                write!(f, "two agents end on vertex {vertex}")
            }
            StepViolation::Swap { first, second } => {
                write!(f, "agents {first} and {second} swap vertices")
            }
        }
    }
}

/// Applies `action` to `config`, enforcing edge existence, injectivity of
/// the result and the no-swap rule. Moving into a vertex vacated in the
/// same step is allowed.
pub fn try_apply_fleet(
    graph: &DiGraph,
    config: &Configuration,
    action: &FleetAction,
) -> std::result::Result<Configuration, StepViolation> {
    if action.0.len() != config.agent_count() {
        return Err(StepViolation::ArityMismatch);
    }
    let mut next = config.0.clone();
    for (agent, act) in action.0.iter().enumerate() {
        if let AgentAction::Move { from, to } = *act {
            if from != config.0[agent] {
                return Err(StepViolation::WrongOrigin { agent });
            }
            if !graph.has_edge(from, to) {
                return Err(StepViolation::MissingEdge { agent });
            }
            next[agent] = to;
        }
    }
    check_transition(&config.0, &next)?;
    Ok(Configuration(next))
}

/// Injectivity of `next` and absence of pairwise swaps between `prev` and `next`.
pub(crate) fn check_transition(
    prev: &[Vertex],
    next: &[Vertex],
) -> std::result::Result<(), StepViolation> {
    let mut seen = HashSet::with_capacity(next.len());
    for &v in next {
        if !seen.insert(v) {
            return Err(StepViolation::Collision { vertex: v });
        }
    }
    for i in 0..prev.len() {
        if prev[i] == next[i] {
            continue;
        }
        for j in (i + 1)..prev.len() {
            if prev[j] == next[i] && next[j] == prev[i] {
                return Err(StepViolation::Swap { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// `None` signals an infeasible action; this is an ordinary search outcome.
pub fn apply_fleet(graph: &DiGraph, config: &Configuration, action: &FleetAction) -> Option<Configuration> {
    try_apply_fleet(graph, config, action).ok()
}

/// A sequence of fleet actions together with its configuration trace.
///
/// `trace[0]` is the start and `trace[k + 1]` results from applying
/// `steps[k]` to `trace[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    steps: Vec<FleetAction>,
    trace: Vec<Configuration>,
}

impl Plan {
    pub fn empty(start: Configuration) -> Self {
        Plan {
            steps: Vec::new(),
            trace: vec![start],
        }
    }

    pub fn new(graph: &DiGraph, start: Configuration, steps: Vec<FleetAction>) -> Result<Self> {
        start.check_on(graph)?;
        let mut trace = Vec::with_capacity(steps.len() + 1);
        trace.push(start);
        for (k, action) in steps.iter().enumerate() {
            let next = try_apply_fleet(graph, &trace[k], action).map_err(|v| MapfError::InvalidStep {
                step: k + 1,
                reason: v.to_string(),
            })?;
            trace.push(next);
        }
        Ok(Plan { steps, trace })
    }

    /// Rebuilds fleet actions by diffing consecutive configurations.
    pub fn from_trace(graph: &DiGraph, trace: Vec<Configuration>) -> Result<Self> {
        let start = trace.first().ok_or_else(|| MapfError::Parameter("empty trace".into()))?;
        start.check_on(graph)?;
        let agents = start.agent_count();
        let mut steps = Vec::with_capacity(trace.len().saturating_sub(1));
        for (k, pair) in trace.windows(2).enumerate() {
            if pair[1].agent_count() != agents {
                return Err(MapfError::AgentCountMismatch {
                    expected: agents,
                    found: pair[1].agent_count(),
                });
            }
            let action = FleetAction::between(&pair[0], &pair[1]);
            try_apply_fleet(graph, &pair[0], &action).map_err(|v| MapfError::InvalidStep {
                step: k + 1,
                reason: v.to_string(),
            })?;
            steps.push(action);
        }
        Ok(Plan { steps, trace })
    }

    /// Trusted constructor for traces produced by the search code.
    pub(crate) fn from_trace_unchecked(trace: Vec<Configuration>) -> Self {
        let steps = trace
            .windows(2)
            .map(|p| FleetAction::between(&p[0], &p[1]))
            .collect();
        Plan { steps, trace }
    }

    /// Appends one action, or returns `None` when it is invalid.
    pub fn extended(&self, graph: &DiGraph, action: FleetAction) -> Option<Plan> {
        let next = apply_fleet(graph, self.last(), &action)?;
        let mut out = self.clone();
        out.steps.push(action);
        out.trace.push(next);
        Some(out)
    }

    /// `|f|`, the makespan.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn makespan(&self) -> usize {
        self.len()
    }

    pub fn agent_count(&self) -> usize {
        self.trace[0].agent_count()
    }

    pub fn steps(&self) -> &[FleetAction] {
        &self.steps
    }

    pub fn trace(&self) -> &[Configuration] {
        &self.trace
    }

    pub fn start(&self) -> &Configuration {
        &self.trace[0]
    }

    pub fn last(&self) -> &Configuration {
        self.trace.last().expect("trace is never empty")
    }

    /// Configuration at step `k`, held at the last one for `k >= |f|`.
    pub fn psi(&self, k: usize) -> &Configuration {
        &self.trace[k.min(self.steps.len())]
    }

    pub fn prefix(&self, k: usize) -> Result<Plan> {
        if k > self.len() {
            return Err(MapfError::PrefixOutOfRange { k, len: self.len() });
        }
        Ok(Plan {
            steps: self.steps[..k].to_vec(),
            trace: self.trace[..=k].to_vec(),
        })
    }

    /// The action sequence of a single agent.
    pub fn path_plan(&self, agent: usize) -> Vec<AgentAction> {
        self.steps.iter().map(|a| a.0[agent]).collect()
    }

    /// Positions of one agent at steps `0..=|f|`.
    pub fn agent_positions(&self, agent: usize) -> Vec<Vertex> {
        self.trace.iter().map(|c| c.position(agent)).collect()
    }

    /// For each agent, the first step from which it stays on its target; summed.
    pub fn sum_of_costs(&self, target: &Configuration) -> usize {
        (0..self.agent_count())
            .map(|p| {
                let goal = target.position(p);
                let mut arrival = self.trace.len();
                for k in (0..self.trace.len()).rev() {
                    if self.trace[k].position(p) == goal {
                        arrival = k;
                    } else {
                        break;
                    }
                }
                arrival
            })
            .sum()
    }
}

/// A MAPF instance. The graph is shared so that many plans and solver runs
/// can refer to it cheaply.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Arc<DiGraph>,
    pub start: Configuration,
    pub target: Configuration,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(graph: DiGraph, start: Configuration, target: Configuration, seed: Option<u64>) -> Result<Self> {
        Self::with_shared(Arc::new(graph), start, target, seed)
    }

    pub fn with_shared(
        graph: Arc<DiGraph>,
        start: Configuration,
        target: Configuration,
        seed: Option<u64>,
    ) -> Result<Self> {
        start.check_on(&graph)?;
        target.check_on(&graph)?;
        if start.agent_count() != target.agent_count() {
            return Err(MapfError::AgentCountMismatch {
                expected: start.agent_count(),
                found: target.agent_count(),
            });
        }
        Ok(Instance {
            graph,
            start,
            target,
            seed,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.start.agent_count()
    }

    pub fn is_feasible(&self, plan: &Plan) -> bool {
        self.validate(plan).is_ok()
    }

    /// Like [`Instance::is_feasible`] but names the first failing step.
    pub fn validate(&self, plan: &Plan) -> Result<()> {
        if plan.start() != &self.start {
            return Err(MapfError::StartMismatch);
        }
        for (k, action) in plan.steps().iter().enumerate() {
            try_apply_fleet(&self.graph, &plan.trace()[k], action).map_err(|v| MapfError::InvalidStep {
                step: k + 1,
                reason: v.to_string(),
            })?;
        }
        if plan.last() != &self.target {
            return Err(MapfError::TargetMismatch);
        }
        Ok(())
    }
}
