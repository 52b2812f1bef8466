//! Feasible starting plans and random instances.
//!
//! [`prioritized_initial`] plans agents one at a time through a
//! time-expanded graph; it is fast but incomplete. [`sequential_initial`]
//! moves one agent per step and yields deliberately slack plans.
//! [`joint_bfs_optimal`]
//! searches the full configuration space and is only usable on tiny
//! instances, where it serves as a makespan oracle.

use std::collections::{HashMap, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MapfError, Result};
use crate::graph::{DiGraph, Vertex};
use crate::plan::{check_transition, Configuration, Instance, Plan};

/// Limits for the exhaustive and prioritized planners.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverBudget {
    pub max_expanded_states: usize,
    pub max_plan_length: usize,
}

impl SolverBudget {
    pub fn new(max_expanded_states: usize, max_plan_length: usize) -> Result<Self> {
        if max_expanded_states == 0 || max_plan_length == 0 {
            return Err(MapfError::Parameter("solver budget limits must be positive".into()));
        }
        Ok(SolverBudget {
            max_expanded_states,
            max_plan_length,
        })
    }

    /// Horizon of `4 * node_count` steps and a generous state cap.
    pub fn for_graph(graph: &DiGraph) -> Self {
        SolverBudget {
            max_expanded_states: 1_000_000,
            max_plan_length: 4 * graph.node_count(),
        }
    }
}

/// Every configuration reachable from `config` by one valid fleet action,
/// including `config` itself. Exponential in the number of agents.
pub fn valid_successors(graph: &DiGraph, config: &Configuration) -> Vec<Configuration> {
    let options: Vec<Vec<Vertex>> = config
        .positions()
        .iter()
        .map(|&v| std::iter::once(v).chain(graph.out_neighbors(v).iter().copied()).collect())
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(options.len());
    fn rec(
        prev: &[Vertex],
        options: &[Vec<Vertex>],
        current: &mut Vec<Vertex>,
        out: &mut Vec<Configuration>,
    ) {
        let agent = current.len();
        if agent == options.len() {
            if check_transition(prev, current).is_ok() {
                out.push(Configuration::from_vec_unchecked(current.clone()));
            }
            return;
        }
        for &v in &options[agent] {
            if current.contains(&v) {
                continue;
            }
            current.push(v);
            rec(prev, options, current, out);
            current.pop();
        }
    }
    rec(config.positions(), &options, &mut current, &mut out);
    out
}

/// Minimum-makespan plan by breadth-first search over configurations.
///
/// Returns `Ok(None)` when the target is unreachable and
/// [`MapfError::BudgetExhausted`] when the state budget runs out.
pub fn joint_bfs_optimal(inst: &Instance, budget: SolverBudget) -> Result<Option<Plan>> {
    let graph = &inst.graph;
    let mut parent: HashMap<Configuration, Option<Configuration>> = HashMap::new();
    let mut depth: HashMap<Configuration, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(inst.start.clone(), None);
    depth.insert(inst.start.clone(), 0);
    queue.push_back(inst.start.clone());
    let mut expanded = 0usize;
    while let Some(config) = queue.pop_front() {
        if config == inst.target {
            let mut trace = vec![config.clone()];
            let mut cursor = config;
            while let Some(Some(prev)) = parent.get(&cursor) {
                trace.push(prev.clone());
                cursor = prev.clone();
            }
            trace.reverse();
            return Ok(Some(Plan::from_trace_unchecked(trace)));
        }
        let d = depth[&config];
        if d >= budget.max_plan_length {
            continue;
        }
        expanded += 1;
        if expanded > budget.max_expanded_states {
            return Err(MapfError::BudgetExhausted(expanded - 1));
        }
        for next in valid_successors(graph, &config) {
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some(config.clone()));
            depth.insert(next.clone(), d + 1);
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// Positions of already planned agents over time; each is held at its last
/// vertex forever.
struct Reservations {
    paths: Vec<Vec<Vertex>>,
}

impl Reservations {
    fn at(path: &[Vertex], t: usize) -> Vertex {
        path[t.min(path.len() - 1)]
    }

    fn occupied(&self, v: Vertex, t: usize) -> bool {
        self.paths.iter().any(|p| Self::at(p, t) == v)
    }

    /// Whether some planned agent traverses `to -> from` between `t` and `t + 1`.
    fn swaps(&self, from: Vertex, to: Vertex, t: usize) -> bool {
        self.paths
            .iter()
            .any(|p| Self::at(p, t) == to && Self::at(p, t + 1) == from)
    }

    /// Whether `v` stays free from step `t` onwards.
    fn free_from(&self, v: Vertex, t: usize) -> bool {
        self.paths
            .iter()
            .all(|p| (t..p.len().max(t + 1)).all(|s| Self::at(p, s) != v))
    }
}

/// Earliest-arrival path for one agent avoiding reserved trajectories.
fn time_expanded_path(
    graph: &DiGraph,
    reservations: &Reservations,
    start: Vertex,
    goal: Vertex,
    horizon: usize,
) -> Option<Vec<Vertex>> {
    let n = graph.node_count();
    let index = |v: Vertex, t: usize| t * n + v.index();
    let mut came_from: Vec<Option<Vertex>> = vec![None; n * (horizon + 1)];
    let mut visited = vec![false; n * (horizon + 1)];
    let mut frontier = vec![start];
    visited[index(start, 0)] = true;
    for t in 0..=horizon {
        for &v in &frontier {
            if v == goal && reservations.free_from(goal, t) {
                let mut path = vec![v];
                let mut cursor = v;
                for s in (1..=t).rev() {
                    cursor = came_from[index(cursor, s)].expect("parent recorded");
                    path.push(cursor);
                }
                path.reverse();
                return Some(path);
            }
        }
        if t == horizon {
            break;
        }
        let mut next_frontier = Vec::new();
        for &v in &frontier {
            let moves = std::iter::once(v).chain(graph.out_neighbors(v).iter().copied());
            for w in moves {
                if visited[index(w, t + 1)] || reservations.occupied(w, t + 1) {
                    continue;
                }
                if w != v && reservations.swaps(v, w, t) {
                    continue;
                }
                visited[index(w, t + 1)] = true;
                came_from[index(w, t + 1)] = Some(v);
                next_frontier.push(w);
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        frontier = next_frontier;
    }
    None
}

fn plan_in_order(inst: &Instance, order: &[usize], horizon: usize) -> Option<Plan> {
    let agents = inst.agent_count();
    let mut reservations = Reservations { paths: Vec::new() };
    let mut paths: Vec<Option<Vec<Vertex>>> = vec![None; agents];
    for &p in order {
        let path = time_expanded_path(
            &inst.graph,
            &reservations,
            inst.start.position(p),
            inst.target.position(p),
            horizon,
        )?;
        reservations.paths.push(path.clone());
        paths[p] = Some(path);
    }
    let paths: Vec<Vec<Vertex>> = paths.into_iter().map(|p| p.expect("every agent planned")).collect();
    let makespan = paths.iter().map(|p| p.len() - 1).max().unwrap_or(0);
    let trace = (0..=makespan)
        .map(|t| Configuration::from_vec_unchecked(paths.iter().map(|p| Reservations::at(p, t)).collect()))
        .collect();
    Some(Plan::from_trace_unchecked(trace))
}

/// Prioritized planning with random restarts of the priority order.
///
/// The first attempt uses agent index order. Any plan returned passes
/// [`Instance::validate`].
pub fn prioritized_initial(inst: &Instance, rng_seed: u64, retries: usize) -> Result<Plan> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let horizon = SolverBudget::for_graph(&inst.graph).max_plan_length;
    let mut order: Vec<usize> = (0..inst.agent_count()).collect();
    for attempt in 0..=retries {
        if attempt > 0 {
            order.shuffle(&mut rng);
        }
        if let Some(plan) = plan_in_order(inst, &order, horizon) {
            inst.validate(&plan)?;
            return Ok(plan);
        }
    }
    Err(MapfError::InitializerFailed(retries + 1))
}

/// Shortest path from `from` to `to` that avoids `blocked`, by BFS.
fn path_avoiding(graph: &DiGraph, from: Vertex, to: Vertex, blocked: &[Vertex]) -> Option<Vec<Vertex>> {
    let mut parent: HashMap<Vertex, Vertex> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    parent.insert(from, from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![v];
            let mut cursor = v;
            while cursor != from {
                cursor = parent[&cursor];
                path.push(cursor);
            }
            path.reverse();
            return Some(path);
        }
        for &w in graph.out_neighbors(v) {
            if !blocked.contains(&w) && !parent.contains_key(&w) {
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Moves one agent at a time along a shortest path around the others,
/// which stand still. Plans are long, since no two agents ever move in
/// the same step, and leave room for the local search.
pub fn sequential_initial(inst: &Instance, rng_seed: u64, retries: usize) -> Result<Plan> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..inst.agent_count()).collect();
    'attempt: for attempt in 0..=retries {
        if attempt > 0 {
            order.shuffle(&mut rng);
        }
        let mut current = inst.start.positions().to_vec();
        let mut trace = vec![inst.start.clone()];
        for &agent in &order {
            let others: Vec<Vertex> = current
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != agent)
                .map(|(_, &v)| v)
                .collect();
            let Some(path) = path_avoiding(&inst.graph, current[agent], inst.target.position(agent), &others) else {
                continue 'attempt;
            };
            for &v in &path[1..] {
                current[agent] = v;
                trace.push(Configuration::from_vec_unchecked(current.clone()));
            }
        }
        let plan = Plan::from_trace_unchecked(trace);
        inst.validate(&plan)?;
        return Ok(plan);
    }
    Err(MapfError::InitializerFailed(retries + 1))
}

/// Random instance: a strongly connected graph with `4 * node_count` edges
/// (rejection sampled) and uniformly drawn start and target configurations.
pub fn generate_instance(node_count: usize, agent_count: usize, rng_seed: u64) -> Result<Instance> {
    if agent_count == 0 {
        return Err(MapfError::Parameter("at least one agent required".into()));
    }
    if agent_count + 2 > node_count {
        return Err(MapfError::Parameter(format!(
            "{agent_count} agents on {node_count} nodes leaves fewer than two free vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let edge_count = (4 * node_count).min(node_count * (node_count - 1));
    let graph = loop {
        let candidate = DiGraph::random_with(node_count, edge_count, &mut rng)?;
        if candidate.is_strongly_connected() {
            break candidate;
        }
    };
    let vertices: Vec<Vertex> = (0..node_count).map(Vertex::from).collect();
    let start: Vec<Vertex> = vertices.choose_multiple(&mut rng, agent_count).copied().collect();
    let target: Vec<Vertex> = vertices.choose_multiple(&mut rng, agent_count).copied().collect();
    Instance::new(
        graph,
        Configuration::new(start)?,
        Configuration::new(target)?,
        Some(rng_seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: &[usize]) -> Configuration {
        Configuration::from_indices(v).unwrap()
    }

    fn cycle_instance(start: &[usize], target: &[usize]) -> Instance {
        let g = DiGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        Instance::new(g, cfg(start), cfg(target), None).unwrap()
    }

    #[test]
    fn oracle_trivial_and_rotation() {
        let budget = SolverBudget::new(10_000, 50).unwrap();
        let same = cycle_instance(&[0, 1], &[0, 1]);
        assert_eq!(joint_bfs_optimal(&same, budget).unwrap().unwrap().makespan(), 0);
        let rotate = cycle_instance(&[0, 1], &[1, 2]);
        let plan = joint_bfs_optimal(&rotate, budget).unwrap().unwrap();
        assert_eq!(plan.makespan(), 1);
        assert!(rotate.is_feasible(&plan));
    }

    #[test]
    fn oracle_budget_exhaustion() {
        let inst = cycle_instance(&[0, 1], &[2, 3]);
        let tiny = SolverBudget::new(1, 50).unwrap();
        assert!(matches!(joint_bfs_optimal(&inst, tiny), Err(MapfError::BudgetExhausted(_))));
        assert!(SolverBudget::new(0, 1).is_err());
    }

    #[test]
    fn prioritized_single_agent_is_shortest() {
        let inst = cycle_instance(&[1], &[0]);
        let plan = prioritized_initial(&inst, 0, 0).unwrap();
        assert_eq!(plan.makespan(), 3);
        let trivial = cycle_instance(&[2], &[2]);
        assert!(prioritized_initial(&trivial, 0, 0).unwrap().is_empty());
    }

    #[test]
    fn prioritized_is_deterministic() {
        let inst = generate_instance(15, 4, 3).unwrap();
        let a = prioritized_initial(&inst, 9, 20);
        let b = prioritized_initial(&inst, 9, 20);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            _ => panic!("non-deterministic outcome"),
        }
    }

    #[test]
    fn sequential_moves_one_agent_per_step() {
        let inst = cycle_instance(&[0, 2], &[1, 3]);
        let plan = sequential_initial(&inst, 0, 3).unwrap();
        assert_eq!(plan.makespan(), 2);
        for w in plan.trace().windows(2) {
            let moved = (0..2).filter(|&p| w[0].position(p) != w[1].position(p)).count();
            assert_eq!(moved, 1);
        }
        // agent 0 needs vertex 1, where agent 1 is parked forever
        let stuck = cycle_instance(&[0, 1], &[2, 1]);
        assert!(matches!(sequential_initial(&stuck, 0, 2), Err(MapfError::InitializerFailed(3))));
    }

    #[test]
    fn generated_instances() {
        let inst = generate_instance(20, 5, 7).unwrap();
        assert_eq!(inst.graph.node_count(), 20);
        assert_eq!(inst.graph.edge_count(), 80);
        assert_eq!(inst.agent_count(), 5);
        assert!(inst.graph.is_strongly_connected());
        let again = generate_instance(20, 5, 7).unwrap();
        assert_eq!(inst.graph.edge_list(), again.graph.edge_list());
        assert_eq!(inst.start, again.start);
        assert_eq!(inst.target, again.target);
        assert!(generate_instance(20, 19, 7).is_err());
        assert!(generate_instance(20, 18, 7).is_ok());
    }

    #[test]
    fn successors_include_wait_and_respect_rules() {
        let g = DiGraph::new(2, &[(0, 1), (1, 0)]).unwrap();
        let succ = valid_successors(&g, &cfg(&[0, 1]));
        assert_eq!(succ, vec![cfg(&[0, 1])]);
    }
}
