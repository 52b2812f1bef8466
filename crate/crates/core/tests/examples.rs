mod common;

use common::{cfg, example_cross, example_graph, example_plan};
use mapf_core::distance::{aggregate_path_metric, config_agent_distance, diff_agents_plans};
use mapf_core::graph::{Hops, Vertex};
use mapf_core::{plan_distance, PlanMetricKind};

#[test]
fn example_plans_are_valid_on_the_reconstructed_graph() {
    let graph = example_graph();
    assert_eq!(graph.node_count(), 10);
    assert!(graph.is_strongly_connected());
    let f0 = example_plan(&graph, "f0");
    let g = example_plan(&graph, "g");
    let h = example_plan(&graph, "h");
    assert_eq!(f0.makespan(), 13);
    assert_eq!(g.makespan(), 5);
    assert_eq!(h.makespan(), 13);
    assert_eq!(f0.last(), g.last());
    assert_eq!(f0.last(), h.last());
}

#[test]
fn clamped_configurations() {
    let graph = example_graph();
    let f0 = example_plan(&graph, "f0");
    let g = example_plan(&graph, "g");
    // zero-based vertex indices
    assert_eq!(f0.psi(3), &cfg(&[6, 9, 4]));
    assert_eq!(g.psi(99), &cfg(&[3, 8, 4]));
    assert_eq!(g.psi(5), g.psi(6));
}

#[test]
fn detour_between_six_and_ten_has_three_hops() {
    let graph = example_graph();
    assert_eq!(graph.hops(Vertex(5), Vertex(9)), Hops::Finite(3));
}

#[test]
fn one_rerouted_agent_is_at_agent_distance_one() {
    let graph = example_graph();
    let f0 = example_plan(&graph, "f0");
    let h = example_plan(&graph, "h");
    assert_eq!(config_agent_distance(f0.psi(4), h.psi(4)), 1);
    assert_eq!(diff_agents_plans(&f0, &h).iter().collect::<Vec<_>>(), vec![0]);
    assert_eq!(plan_distance(&graph, &h, &f0, PlanMetricKind::UAgents).unwrap(), Hops::Finite(1));
    assert_eq!(plan_distance(&graph, &h, &f0, PlanMetricKind::MaxAgents).unwrap(), Hops::Finite(1));
}

#[test]
fn every_agent_differs_from_the_short_plan() {
    let graph = example_graph();
    let f0 = example_plan(&graph, "f0");
    let g = example_plan(&graph, "g");
    // the third agent sits on node 1 in f0 but node 5 in g at step 4
    assert_ne!(f0.psi(4).position(2), g.psi(4).position(2));
    assert_eq!(diff_agents_plans(&f0, &g).iter().collect::<Vec<_>>(), vec![0, 1, 2]);
}

#[test]
fn aggregators_reproduce_the_worked_values() {
    let graph = example_graph();
    let f0 = example_plan(&graph, "f0");
    let g = example_plan(&graph, "g");
    let cross = example_cross(&g, &f0);
    let agg = |kind| aggregate_path_metric(kind, g.len(), f0.len(), &cross);
    assert_eq!(agg(PlanMetricKind::MaxMin), Hops::Finite(3));
    assert_eq!(agg(PlanMetricKind::SumMin), Hops::Finite(3));
    assert_eq!(agg(PlanMetricKind::InfPath), Hops::Finite(8));
    assert_eq!(agg(PlanMetricKind::OnePath), Hops::Finite(19));
}
