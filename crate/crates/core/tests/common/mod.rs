//! Test support: fixtures, random suites and brute-force oracles that do
//! not share code with the solver's search.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mapf_core::graph::{DiGraph, Hops, Vertex};
use mapf_core::init::prioritized_initial;
use mapf_core::plan::{try_apply_fleet, AgentAction, Configuration, FleetAction, Instance, Plan};
use mapf_core::format::read_plan;
use mapf_core::PlanMetricKind;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn example_graph() -> DiGraph {
    DiGraph::parse(&std::fs::read_to_string(fixture("example10_graph.txt")).unwrap()).unwrap()
}

pub fn example_plan(graph: &DiGraph, name: &str) -> Plan {
    read_plan(graph, &fixture(&format!("example10_{name}.json"))).unwrap()
}

pub fn cfg(v: &[usize]) -> Configuration {
    Configuration::from_indices(v).unwrap()
}

/// All fleet actions from `config`, each checked by the plan validator.
pub fn fleet_successors(graph: &DiGraph, config: &Configuration) -> Vec<Configuration> {
    let options: Vec<Vec<AgentAction>> = config
        .positions()
        .iter()
        .map(|&v| {
            std::iter::once(AgentAction::Wait)
                .chain(graph.out_neighbors(v).iter().map(move |&to| AgentAction::Move { from: v, to }))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let action = FleetAction(pick.iter().zip(&options).map(|(&i, o)| o[i]).collect());
        if let Ok(next) = try_apply_fleet(graph, config, &action) {
            out.push(next);
        }
        let mut slot = 0;
        loop {
            if slot == pick.len() {
                return out;
            }
            pick[slot] += 1;
            if pick[slot] < options[slot].len() {
                break;
            }
            pick[slot] = 0;
            slot += 1;
        }
    }
}

fn at(trace: &[Configuration], k: usize) -> &Configuration {
    &trace[k.min(trace.len() - 1)]
}

fn hops(graph: &DiGraph, from: Vertex, to: Vertex) -> Option<u64> {
    graph.hops(from, to).finite()
}

/// Sum over steps of the distance from the closest reference configuration,
/// straight from the definition.
pub fn sum_min_by_definition(graph: &DiGraph, g: &[Configuration], f0: &[Configuration]) -> Option<u64> {
    let (lg, lf) = (g.len() - 1, f0.len() - 1);
    let mut total = 0;
    for k in 1..=lg.min(lf) {
        let mut best: Option<u64> = None;
        for h in 0..=lg.max(lf) {
            let d: Option<u64> = (0..g[0].agent_count())
                .map(|p| hops(graph, at(f0, h).position(p), at(g, k).position(p)))
                .sum();
            if let Some(d) = d {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        total += best?;
    }
    Some(total)
}

/// Agents whose positions differ from the reference at some step.
pub fn u_agents_by_definition(g: &[Configuration], f0: &[Configuration]) -> usize {
    let horizon = (g.len() - 1).max(f0.len() - 1);
    let mut agents = BTreeSet::new();
    for k in 1..=horizon {
        for p in 0..g[0].agent_count() {
            if at(g, k).position(p) != at(f0, k).position(p) {
                agents.insert(p);
            }
        }
    }
    agents.len()
}

/// Minimal makespan over all feasible plans `g` with `|g| <= |f0|` and
/// `d(g, f0) <= r`, by exhaustive depth-first enumeration.
pub fn oracle_min_makespan(inst: &Instance, f0: &Plan, r: u64, kind: PlanMetricKind) -> Option<usize> {
    let graph = inst.graph.as_ref();
    let reference = f0.trace();
    for len in 0..=f0.len() {
        let mut trace = vec![inst.start.clone()];
        if dfs(graph, inst, reference, r, kind, len, &mut trace) {
            return Some(len);
        }
    }
    None
}

fn dfs(
    graph: &DiGraph,
    inst: &Instance,
    reference: &[Configuration],
    r: u64,
    kind: PlanMetricKind,
    len: usize,
    trace: &mut Vec<Configuration>,
) -> bool {
    let steps = trace.len() - 1;
    let last = trace.last().unwrap();
    let remaining = (len - steps) as u64;
    let too_far = (0..inst.agent_count())
        .any(|p| graph.hops(last.position(p), inst.target.position(p)).finite().is_none_or(|d| d > remaining));
    if too_far {
        return false;
    }
    // prefix pruning: both measures only grow with the steps already fixed
    let prefix_cost = match kind {
        PlanMetricKind::SumMin => sum_min_by_definition(graph, trace, reference).unwrap_or(u64::MAX),
        _ => {
            let mut agents = BTreeSet::new();
            for (k, config) in trace.iter().enumerate().skip(1) {
                for p in 0..inst.agent_count() {
                    if config.position(p) != at(reference, k).position(p) {
                        agents.insert(p);
                    }
                }
            }
            agents.len() as u64
        }
    };
    if prefix_cost > r {
        return false;
    }
    if steps == len {
        let full = match kind {
            PlanMetricKind::SumMin => sum_min_by_definition(graph, trace, reference),
            _ => Some(u_agents_by_definition(trace, reference) as u64),
        };
        return last == &inst.target && full.is_some_and(|d| d <= r);
    }
    for next in fleet_successors(graph, last) {
        trace.push(next);
        if dfs(graph, inst, reference, r, kind, len, trace) {
            return true;
        }
        trace.pop();
    }
    false
}

/// Random strongly connected graph with between `n + 1` and `2n + 2` edges.
pub fn sparse_strong_graph(n: usize, rng: &mut ChaCha8Rng) -> DiGraph {
    loop {
        let max_edges = n * (n - 1);
        let m = rng.random_range(n + 1..=(2 * n + 2).min(max_edges));
        let g = DiGraph::random_with(n, m, rng).unwrap();
        if g.is_strongly_connected() {
            return g;
        }
    }
}

/// Random instance on `n` nodes with a feasible, deliberately slack plan:
/// the prioritized plan with a few all-wait steps inserted.
pub fn slack_instance(n: usize, agents: usize, seed: u64) -> Option<(Instance, Plan)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = sparse_strong_graph(n, &mut rng);
    let vertices: Vec<usize> = (0..n).collect();
    let start: Vec<usize> = vertices.choose_multiple(&mut rng, agents).copied().collect();
    let target: Vec<usize> = vertices.choose_multiple(&mut rng, agents).copied().collect();
    let inst = Instance::new(graph, cfg(&start), cfg(&target), Some(seed)).unwrap();
    let base = prioritized_initial(&inst, seed, 5).ok()?;
    let mut trace = base.trace().to_vec();
    for _ in 0..rng.random_range(0..=2usize) {
        let at = rng.random_range(0..trace.len());
        let copy = trace[at].clone();
        trace.insert(at, copy);
    }
    let f0 = Plan::from_trace(&inst.graph, trace).unwrap();
    assert!(inst.is_feasible(&f0));
    Some((inst, f0))
}

/// The oracle suite: `count` instances on at most seven nodes with two agents.
pub fn oracle_suite(count: usize) -> Vec<(Instance, Plan)> {
    let mut suite = Vec::new();
    let mut seed = 0u64;
    while suite.len() < count {
        let n = 4 + (seed % 4) as usize;
        if let Some(case) = slack_instance(n, 2, seed) {
            suite.push(case);
        }
        seed += 1;
    }
    suite
}

/// Random valid plan of length `len` from `start`; stops early if stuck.
pub fn random_walk(graph: &DiGraph, start: &Configuration, len: usize, rng: &mut ChaCha8Rng) -> Plan {
    let mut trace = vec![start.clone()];
    for _ in 0..len {
        let options = fleet_successors(graph, trace.last().unwrap());
        trace.push(options.choose(rng).unwrap().clone());
    }
    Plan::from_trace(graph, trace).unwrap()
}

pub fn hops_value(h: Hops) -> u64 {
    h.finite().unwrap_or(u64::MAX)
}

/// Per-step distances of the worked example injected in place of the graph:
/// 0, 0, 3, 8, 8 on the diagonal for steps 1 to 5, zero wherever the two
/// configurations coincide, and a large value elsewhere.
pub fn example_cross<'a>(g: &'a Plan, f0: &'a Plan) -> impl Fn(usize, usize) -> Hops + 'a {
    const DIAGONAL: [u64; 6] = [0, 0, 0, 3, 8, 8];
    move |k, h| {
        if g.psi(k) == f0.psi(h) {
            Hops::ZERO
        } else if k == h {
            Hops::Finite(DIAGONAL[k.min(5)])
        } else {
            Hops::Finite(100)
        }
    }
}
