mod common;

use common::{hops_value, random_walk, sparse_strong_graph};
use mapf_core::distance::{diff_agents_by_path_plans, diff_agents_plans};
use mapf_core::graph::DiGraph;
use mapf_core::plan::{Configuration, Plan};
use mapf_core::{plan_distance, PlanMetricKind};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use PlanMetricKind::*;

const PATH_KINDS: [PlanMetricKind; 4] = [InfPath, OnePath, MaxMin, SumMin];

struct Pair {
    graph: DiGraph,
    f: Plan,
    g: Plan,
}

fn pair(seed: u64, equal_lengths: bool) -> Pair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=9usize);
    let graph = sparse_strong_graph(n, &mut rng);
    let agents = rng.random_range(1..=3usize.min(n - 1));
    let vertices: Vec<usize> = (0..n).collect();
    let start: Vec<usize> = vertices.choose_multiple(&mut rng, agents).copied().collect();
    let start = Configuration::from_indices(&start).unwrap();
    let lf = rng.random_range(0..=7usize);
    let lg = if equal_lengths { lf } else { rng.random_range(0..=7usize) };
    let f = random_walk(&graph, &start, lf, &mut rng);
    let g = random_walk(&graph, &start, lg, &mut rng);
    Pair { graph, f, g }
}

fn d(p: &Pair, f: &Plan, g: &Plan, kind: PlanMetricKind) -> u64 {
    hops_value(plan_distance(&p.graph, f, g, kind).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn self_distance_is_zero(seed in any::<u64>()) {
        let p = pair(seed, false);
        for kind in PlanMetricKind::ALL {
            prop_assert_eq!(d(&p, &p.f, &p.f, kind), 0);
        }
    }

    #[test]
    fn ordering_on_equal_lengths(seed in any::<u64>()) {
        let p = pair(seed, true);
        let v = |k| d(&p, &p.g, &p.f, k);
        prop_assert!(v(MaxMin) <= v(InfPath));
        prop_assert!(v(InfPath) <= v(OnePath));
        prop_assert!(v(MaxMin) <= v(SumMin));
        prop_assert!(v(SumMin) <= v(OnePath));
    }

    #[test]
    fn common_range_orderings_hold_for_any_lengths(seed in any::<u64>()) {
        let p = pair(seed, false);
        let v = |k| d(&p, &p.g, &p.f, k);
        prop_assert!(v(InfPath) <= v(OnePath));
        prop_assert!(v(SumMin) <= v(OnePath));
    }

    #[test]
    fn max_agents_below_u_agents(seed in any::<u64>()) {
        let p = pair(seed, false);
        prop_assert!(d(&p, &p.g, &p.f, MaxAgents) <= d(&p, &p.g, &p.f, UAgents));
    }

    #[test]
    fn path_metrics_grow_with_the_prefix(seed in any::<u64>()) {
        let p = pair(seed, false);
        for kind in PATH_KINDS {
            let mut previous = 0;
            for k in 0..=p.g.len() {
                let value = d(&p, &p.g.prefix(k).unwrap(), &p.f, kind);
                prop_assert!(value >= previous, "{} at prefix {}", kind, k);
                previous = value;
            }
        }
    }

    #[test]
    fn empty_plan_is_at_distance_zero_for_path_metrics(seed in any::<u64>()) {
        let p = pair(seed, false);
        let empty = p.g.prefix(0).unwrap();
        for kind in PATH_KINDS {
            prop_assert_eq!(d(&p, &empty, &p.f, kind), 0);
        }
    }

    #[test]
    fn diff_agent_characterizations_agree(seed in any::<u64>()) {
        let p = pair(seed, false);
        prop_assert_eq!(diff_agents_plans(&p.f, &p.g), diff_agents_by_path_plans(&p.f, &p.g));
    }

    #[test]
    fn agent_metrics_ignore_the_graph(seed in any::<u64>()) {
        let p = pair(seed, false);
        let n = p.graph.node_count();
        let complete: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
        let other = DiGraph::new(n, &complete).unwrap();
        for kind in [UAgents, MaxAgents] {
            prop_assert_eq!(
                plan_distance(&p.graph, &p.g, &p.f, kind).unwrap(),
                plan_distance(&other, &p.g, &p.f, kind).unwrap()
            );
        }
    }
}

#[test]
fn unequal_lengths_can_invert_max_min_and_inf_path() {
    // The max-min distance looks at every step of the longer plan, the
    // infinity distance only at the common steps.
    let graph = DiGraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    let start = Configuration::from_indices(&[0]).unwrap();
    let f = Plan::from_trace(&graph, vec![start.clone()]).unwrap();
    let g = Plan::from_trace(&graph, vec![start, Configuration::from_indices(&[1]).unwrap()]).unwrap();
    let p = Pair { graph, f, g };
    assert_eq!(d(&p, &p.g, &p.f, InfPath), 0);
    assert_eq!(d(&p, &p.g, &p.f, MaxMin), 1);
}
