//! Dominance-pruned dynamic programming over a distance-bounded
//! neighborhood of a reference plan.
//!
//! States are equivalence classes of plan prefixes, encoded as
//! `(beta, gamma, extra)`: the prefix length, the configuration it reaches,
//! and either the accumulated sum-min distance (`sigma`) or the set of
//! agents that diverged from the reference (`omega`). The queue is ordered
//! by `beta`, and since every transition adds exactly one step the first
//! target state popped has minimal makespan within the neighborhood.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use crate::distance::{DiffAgentSet, PlanMetricKind};
use crate::error::{MapfError, Result};
use crate::graph::{DiGraph, Vertex};
use crate::plan::{check_transition, Configuration, Instance, Plan};

/// State for the sum-min neighborhood.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathState {
    pub beta: usize,
    pub gamma: Configuration,
    pub sigma: u64,
}

/// State for the u-agents neighborhood.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub beta: usize,
    pub gamma: Configuration,
    pub omega: DiffAgentSet,
}

impl PathState {
    pub fn initial(start: Configuration) -> Self {
        PathState {
            beta: 0,
            gamma: start,
            sigma: 0,
        }
    }
}

impl AgentState {
    pub fn initial(start: Configuration) -> Self {
        AgentState {
            beta: 0,
            gamma: start,
            omega: DiffAgentSet::new(),
        }
    }
}

/// `s1` dominates `s2` when it is no longer, reaches the same configuration
/// and has used no more of the distance budget.
pub fn dominates_path(s1: &PathState, s2: &PathState) -> bool {
    s1.beta <= s2.beta && s1.gamma == s2.gamma && s1.sigma <= s2.sigma
}

/// Lengths must be equal here: the reference step an agent is compared
/// against depends on `beta`.
pub fn dominates_agents(s1: &AgentState, s2: &AgentState) -> bool {
    s1.beta == s2.beta && s1.gamma == s2.gamma && s1.omega.is_subset(&s2.omega)
}

/// Successors of one state plus the number of candidate strings built.
#[derive(Clone, Debug)]
pub struct Expansion<S> {
    pub successors: Vec<S>,
    /// Partial configurations generated (sum-min) or candidate fleet
    /// actions enumerated (u-agents), before any pruning.
    pub candidates: usize,
}

/// Shared, precomputed view of the reference plan.
struct Reference<'a> {
    graph: &'a DiGraph,
    trace: &'a [Configuration],
    radius: u64,
}

impl<'a> Reference<'a> {
    fn new(graph: &'a DiGraph, f0: &'a Plan, radius: u64) -> Self {
        Reference {
            graph,
            trace: f0.trace(),
            radius,
        }
    }

    fn len(&self) -> usize {
        self.trace.len() - 1
    }

    fn psi(&self, k: usize) -> &Configuration {
        &self.trace[k.min(self.len())]
    }
}

fn candidates(graph: &DiGraph, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
    std::iter::once(v).chain(graph.out_neighbors(v).iter().copied())
}

/// Partial configuration with the running distance to every reference
/// configuration that is still within budget, as `(k, sum)` pairs.
struct Partial {
    vertices: Vec<Vertex>,
    sums: Vec<(u32, u64)>,
}

/// Builds successors one agent at a time. A partial configuration survives
/// while its distance to some reference configuration, summed over the
/// agents placed so far, stays within the remaining budget; this never
/// exceeds the full configuration's distance, so pruning is exact. The
/// swap rule is checked once the configuration is complete, and `sigma`
/// grows by the distance of the new configuration from the closest
/// reference configuration.
fn expand_path_impl(reference: &Reference<'_>, beta: usize, gamma: &Configuration, sigma: u64) -> Expansion<PathState> {
    let graph = reference.graph;
    let budget = reference.radius.saturating_sub(sigma);
    let agents = gamma.agent_count();
    let mut generated = 0usize;
    let mut layer = vec![Partial {
        vertices: Vec::with_capacity(agents),
        sums: (0..reference.trace.len()).map(|k| (k as u32, 0)).collect(),
    }];
    for p in 0..agents {
        let mut next_layer = Vec::new();
        for partial in &layer {
            for n in candidates(graph, gamma.position(p)) {
                generated += 1;
                if partial.vertices.contains(&n) {
                    continue;
                }
                let sums: Vec<(u32, u64)> = partial
                    .sums
                    .iter()
                    .filter_map(|&(k, s)| {
                        let anchor = reference.trace[k as usize].position(p);
                        graph
                            .vertex_distance(n, anchor)
                            .finite()
                            .map(|d| (k, s + d))
                            .filter(|&(_, total)| total <= budget)
                    })
                    .collect();
                if sums.is_empty() {
                    continue;
                }
                let mut vertices = Vec::with_capacity(agents);
                vertices.extend_from_slice(&partial.vertices);
                vertices.push(n);
                next_layer.push(Partial { vertices, sums });
            }
        }
        layer = next_layer;
    }
    let successors = layer
        .into_iter()
        .filter(|a| check_transition(gamma.positions(), &a.vertices).is_ok())
        .map(|a| {
            let delta = a.sums.iter().map(|&(_, s)| s).min().expect("non-empty");
            PathState {
                beta: beta + 1,
                gamma: Configuration::from_vec_unchecked(a.vertices),
                sigma: sigma + delta,
            }
        })
        .collect();
    Expansion {
        successors,
        candidates: generated,
    }
}

/// Sum-min expansion of `state` within radius `r` of `f0`.
pub fn expand_path(graph: &DiGraph, state: &PathState, f0: &Plan, r: u64) -> Expansion<PathState> {
    let reference = Reference::new(graph, f0, r);
    expand_path_impl(&reference, state.beta, &state.gamma, state.sigma)
}

fn for_each_subset(pool: &[usize], max_size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(pool: &[usize], start: usize, max_size: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        f(chosen);
        if chosen.len() == max_size {
            return;
        }
        for i in start..pool.len() {
            chosen.push(pool[i]);
            rec(pool, i + 1, max_size, chosen, f);
            chosen.pop();
        }
    }
    rec(pool, 0, max_size, &mut Vec::new(), f);
}

/// Agents outside `omega` and the chosen subset replay the reference step;
/// the others pick any of `{stay} ∪ out-neighbors`.
fn expand_agents_impl(
    reference: &Reference<'_>,
    beta: usize,
    gamma: &Configuration,
    omega: &DiffAgentSet,
) -> Expansion<AgentState> {
    let graph = reference.graph;
    let r = reference.radius as usize;
    let agents = gamma.agent_count();
    let next_ref = reference.psi(beta + 1);
    let mut enumerated = 0usize;
    let mut seen: HashSet<(Configuration, DiffAgentSet)> = HashSet::new();
    let mut successors = Vec::new();
    if omega.len() > r {
        return Expansion {
            successors,
            candidates: 0,
        };
    }
    let pool: Vec<usize> = (0..agents).filter(|&p| !omega.contains(p)).collect();
    let mut free = Vec::with_capacity(r);
    for_each_subset(&pool, r - omega.len(), &mut |subset| {
        free.clear();
        free.extend(omega.iter());
        free.extend_from_slice(subset);
        free.sort_unstable();
        let mut base: Vec<Vertex> = next_ref.positions().to_vec();
        let options: Vec<Vec<Vertex>> = free.iter().map(|&p| candidates(graph, gamma.position(p)).collect()).collect();
        let mut choice = vec![0usize; free.len()];
        loop {
            for (slot, &p) in free.iter().enumerate() {
                base[p] = options[slot][choice[slot]];
            }
            enumerated += 1;
            if check_transition(gamma.positions(), &base).is_ok() {
                let mut next_omega = omega.clone();
                for &p in &free {
                    if base[p] != next_ref.position(p) {
                        next_omega.insert(p);
                    }
                }
                if next_omega.len() <= r {
                    let config = Configuration::from_vec_unchecked(base.clone());
                    if seen.insert((config.clone(), next_omega.clone())) {
                        successors.push(AgentState {
                            beta: beta + 1,
                            gamma: config,
                            omega: next_omega,
                        });
                    }
                }
            }
            // odometer over the free agents' options
            let mut slot = 0;
            loop {
                if slot == free.len() {
                    return;
                }
                choice[slot] += 1;
                if choice[slot] < options[slot].len() {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
        }
    });
    Expansion {
        successors,
        candidates: enumerated,
    }
}

/// U-agents expansion of `state` within radius `r` of `f0`.
pub fn expand_agents(graph: &DiGraph, state: &AgentState, f0: &Plan, r: u64) -> Expansion<AgentState> {
    let reference = Reference::new(graph, f0, r);
    expand_agents_impl(&reference, state.beta, &state.gamma, &state.omega)
}

/// Binomial coefficient, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

fn pow(base: u64, exp: u64) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Ceilings on the work of one search, from the neighborhood cardinality bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ceilings {
    /// Bound on distinct states created.
    pub states: u128,
    /// Bound on partial configurations generated in one sum-min expansion.
    pub partial_configs: Option<u128>,
    /// Bound on distinct successors of one u-agents expansion.
    pub successors: Option<u128>,
}

impl Ceilings {
    pub fn compute(graph: &DiGraph, agents: usize, plan_len: usize, r: u64, kind: PlanMetricKind) -> Self {
        let phi = graph.max_out_degree() as u64;
        let k = agents as u64;
        let len = plan_len as u128;
        match kind {
            PlanMetricKind::UAgents => {
                let n = graph.node_count() as u64;
                let rr = r.min(k);
                let falling = (0..rr).fold(1u128, |acc, i| acc.saturating_mul((n - k + rr - i) as u128));
                Ceilings {
                    states: len.saturating_mul(binomial(k, rr)).saturating_mul(falling),
                    partial_configs: None,
                    successors: Some(binomial(k, rr).saturating_mul(pow(phi + 1, rr))),
                }
            }
            _ => {
                let states = len
                    .saturating_mul(len)
                    .saturating_mul(binomial(k + r, r))
                    .saturating_mul(pow(phi, r))
                    .saturating_mul((r + 1) as u128);
                let partial = (0..k).fold(0u128, |acc, i| {
                    acc.saturating_add(
                        pow(phi, r + 1)
                            .saturating_mul(binomial(i + r, r))
                            .saturating_mul(len),
                    )
                });
                Ceilings {
                    states,
                    partial_configs: Some(partial),
                    successors: None,
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpOptions {
    /// Apply the dominance rules; exact duplicates are suppressed either way.
    pub dominance: bool,
    /// Cap on created states; `None` means ten times the state ceiling.
    pub state_cap: Option<usize>,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            dominance: true,
            state_cap: None,
        }
    }
}

/// Counters collected during one search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DpStats {
    /// Distinct states inserted into the queue, excluding the initial state.
    pub states_created: usize,
    pub states_expanded: usize,
    /// Queue states removed because a newly inserted state dominated them.
    pub states_removed: usize,
    /// Successors rejected because a queued state dominated them.
    pub states_pruned: usize,
    pub max_candidates_per_expand: usize,
    pub max_successors_per_expand: usize,
    pub total_candidates: usize,
}

#[derive(Clone, Debug)]
pub struct DpOutcome {
    /// Shortest plan found in the neighborhood, if any.
    pub plan: Option<Plan>,
    pub stats: DpStats,
    pub ceilings: Ceilings,
}

impl DpOutcome {
    /// Whether every counter respects its ceiling.
    pub fn within_ceilings(&self) -> bool {
        let s = &self.stats;
        (s.states_created as u128) <= self.ceilings.states
            && self
                .ceilings
                .partial_configs
                .is_none_or(|c| (s.max_candidates_per_expand as u128) <= c)
            && self
                .ceilings
                .successors
                .is_none_or(|c| (s.max_successors_per_expand as u128) <= c)
    }
}

trait Space {
    type Extra: Clone + Eq + Hash + Debug;

    fn root_extra(&self) -> Self::Extra;
    /// Dominance between two states already known to share `gamma`.
    fn dominates(&self, a: (usize, &Self::Extra), b: (usize, &Self::Extra)) -> bool;
    fn expand(&self, beta: usize, gamma: &Configuration, extra: &Self::Extra) -> (Vec<(Configuration, Self::Extra)>, usize);
    fn is_goal(&self, beta: usize, gamma: &Configuration, extra: &Self::Extra) -> bool;
    fn budget_used(&self, extra: &Self::Extra) -> usize;
}

struct PathSpace<'a> {
    reference: Reference<'a>,
    target: &'a Configuration,
}

impl Space for PathSpace<'_> {
    type Extra = u64;

    fn root_extra(&self) -> u64 {
        0
    }

    fn dominates(&self, a: (usize, &u64), b: (usize, &u64)) -> bool {
        a.0 <= b.0 && a.1 <= b.1
    }

    fn expand(&self, beta: usize, gamma: &Configuration, sigma: &u64) -> (Vec<(Configuration, u64)>, usize) {
        let e = expand_path_impl(&self.reference, beta, gamma, *sigma);
        (e.successors.into_iter().map(|s| (s.gamma, s.sigma)).collect(), e.candidates)
    }

    fn is_goal(&self, _beta: usize, gamma: &Configuration, _sigma: &u64) -> bool {
        gamma == self.target
    }

    fn budget_used(&self, sigma: &u64) -> usize {
        *sigma as usize
    }
}

struct AgentSpace<'a> {
    reference: Reference<'a>,
    target: &'a Configuration,
    /// `tails[beta]`: agents that leave their target somewhere after `beta` in the reference.
    tails: Vec<DiffAgentSet>,
}

impl<'a> AgentSpace<'a> {
    fn new(reference: Reference<'a>, target: &'a Configuration) -> Self {
        let len = reference.len();
        let mut tails = vec![DiffAgentSet::new(); len + 1];
        for beta in (0..len).rev() {
            let mut tail = tails[beta + 1].clone();
            for p in 0..target.agent_count() {
                if reference.psi(beta + 1).position(p) != target.position(p) {
                    tail.insert(p);
                }
            }
            tails[beta] = tail;
        }
        AgentSpace {
            reference,
            target,
            tails,
        }
    }
}

impl Space for AgentSpace<'_> {
    type Extra = DiffAgentSet;

    fn root_extra(&self) -> DiffAgentSet {
        DiffAgentSet::new()
    }

    fn dominates(&self, a: (usize, &DiffAgentSet), b: (usize, &DiffAgentSet)) -> bool {
        a.0 == b.0 && a.1.is_subset(b.1)
    }

    fn expand(&self, beta: usize, gamma: &Configuration, omega: &DiffAgentSet) -> (Vec<(Configuration, DiffAgentSet)>, usize) {
        let e = expand_agents_impl(&self.reference, beta, gamma, omega);
        for s in &e.successors {
            debug_assert!((0..gamma.agent_count())
                .filter(|&p| !s.omega.contains(p))
                .all(|p| s.gamma.position(p) == self.reference.psi(s.beta).position(p)));
        }
        (e.successors.into_iter().map(|s| (s.gamma, s.omega)).collect(), e.candidates)
    }

    /// A plan ending at `beta` is compared against the rest of the
    /// reference while it sits on the target, so agents the reference still
    /// moves afterwards count as diverged.
    fn is_goal(&self, beta: usize, gamma: &Configuration, omega: &DiffAgentSet) -> bool {
        if gamma != self.target {
            return false;
        }
        let tail = &self.tails[beta.min(self.reference.len())];
        let extra = tail.iter().filter(|&p| !omega.contains(p)).count();
        omega.len() + extra <= self.reference.radius as usize
    }

    fn budget_used(&self, omega: &DiffAgentSet) -> usize {
        omega.len()
    }
}

struct Node<X> {
    beta: usize,
    gamma: Configuration,
    extra: X,
    parent: Option<usize>,
    alive: bool,
}

fn config_digest(c: &Configuration) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    c.hash(&mut h);
    h.finish()
}

fn run<S: Space>(space: &S, start: &Configuration, horizon: usize, options: &DpOptions, cap: usize) -> Result<(Option<Plan>, DpStats)> {
    let mut stats = DpStats::default();
    let mut arena: Vec<Node<S::Extra>> = vec![Node {
        beta: 0,
        gamma: start.clone(),
        extra: space.root_extra(),
        parent: None,
        alive: true,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0usize, 0usize)));
    let mut queued: HashMap<Configuration, Vec<usize>> = HashMap::new();
    if options.dominance {
        queued.entry(start.clone()).or_default().push(0);
    }
    let mut seen: HashSet<(Configuration, S::Extra)> = HashSet::new();
    let mut layer = 0usize;

    while let Some(Reverse((beta, id))) = heap.pop() {
        if !arena[id].alive {
            continue;
        }
        arena[id].alive = false;
        if options.dominance {
            if let Some(ids) = queued.get_mut(&arena[id].gamma) {
                ids.retain(|&i| i != id);
            }
        }
        if beta > layer {
            layer = beta;
            seen.clear();
        }
        log::trace!(
            "pop beta={} gamma={:016x} budget={} queue={}",
            beta,
            config_digest(&arena[id].gamma),
            space.budget_used(&arena[id].extra),
            heap.len()
        );
        if space.is_goal(beta, &arena[id].gamma, &arena[id].extra) {
            let mut trace = Vec::with_capacity(beta + 1);
            let mut cursor = Some(id);
            while let Some(i) = cursor {
                trace.push(arena[i].gamma.clone());
                cursor = arena[i].parent;
            }
            trace.reverse();
            return Ok((Some(Plan::from_trace_unchecked(trace)), stats));
        }
        if beta >= horizon {
            continue;
        }
        let (successors, candidates) = space.expand(beta, &arena[id].gamma, &arena[id].extra);
        stats.states_expanded += 1;
        stats.total_candidates += candidates;
        stats.max_candidates_per_expand = stats.max_candidates_per_expand.max(candidates);
        stats.max_successors_per_expand = stats.max_successors_per_expand.max(successors.len());
        let next_beta = beta + 1;
        for (gamma, extra) in successors {
            if !seen.insert((gamma.clone(), extra.clone())) {
                continue;
            }
            if options.dominance {
                let bucket = queued.entry(gamma.clone()).or_default();
                if bucket
                    .iter()
                    .any(|&q| space.dominates((arena[q].beta, &arena[q].extra), (next_beta, &extra)))
                {
                    stats.states_pruned += 1;
                    continue;
                }
                bucket.retain(|&q| {
                    let dominated = space.dominates((next_beta, &extra), (arena[q].beta, &arena[q].extra));
                    if dominated {
                        arena[q].alive = false;
                        stats.states_removed += 1;
                    }
                    !dominated
                });
                bucket.push(arena.len());
            }
            stats.states_created += 1;
            if stats.states_created > cap {
                return Err(MapfError::BudgetExhausted(stats.states_created));
            }
            heap.push(Reverse((next_beta, arena.len())));
            arena.push(Node {
                beta: next_beta,
                gamma,
                extra,
                parent: Some(id),
                alive: true,
            });
        }
    }
    Ok((None, stats))
}

/// Shortest plan `g` with `|g| <= |f0|` and `d(g, f0) <= r`, for the
/// sum-min or u-agents distance.
pub fn dp_search(inst: &Instance, f0: &Plan, r: u64, kind: PlanMetricKind) -> Result<DpOutcome> {
    dp_search_with(inst, f0, r, kind, &DpOptions::default())
}

pub fn dp_search_with(inst: &Instance, f0: &Plan, r: u64, kind: PlanMetricKind, options: &DpOptions) -> Result<DpOutcome> {
    inst.validate(f0)?;
    let graph = inst.graph.as_ref();
    let ceilings = Ceilings::compute(graph, inst.agent_count(), f0.len(), r, kind);
    let cap = options.state_cap.unwrap_or_else(|| {
        usize::try_from(ceilings.states.saturating_mul(10)).unwrap_or(usize::MAX)
    });
    let reference = Reference::new(graph, f0, r);
    let (plan, stats) = match kind {
        PlanMetricKind::SumMin => {
            let space = PathSpace {
                reference,
                target: &inst.target,
            };
            run(&space, &inst.start, f0.len(), options, cap)?
        }
        PlanMetricKind::UAgents => {
            let space = AgentSpace::new(reference, &inst.target);
            run(&space, &inst.start, f0.len(), options, cap)?
        }
        other => {
            return Err(MapfError::Parameter(format!(
                "neighborhood search supports sum-min and u-agents, not {other}"
            )))
        }
    };
    debug_assert!(plan.as_ref().is_none_or(|p| inst.is_feasible(p)));
    Ok(DpOutcome { plan, stats, ceilings })
}
