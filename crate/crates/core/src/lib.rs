//! Plan improvement for multi-agent path finding on directed graphs.
//!
//! A feasible plan from a fast initializer is shortened by repeatedly
//! replacing it with the shortest plan in a bounded neighborhood, found by a
//! dominance-pruned dynamic program. Two neighborhoods are provided: plans
//! whose configurations stay close in graph distance (sum-min) and plans
//! where only a few agents change their paths (u-agents).

pub mod bench;
pub mod distance;
pub mod dp;
pub mod error;
pub mod format;
pub mod graph;
pub mod init;
pub mod plan;
pub mod search;

pub use distance::{plan_distance, DiffAgentSet, PlanMetricKind};
pub use dp::{dp_search, dp_search_with, DpOptions, DpOutcome, DpStats};
pub use error::{MapfError, Result};
pub use graph::{DiGraph, Hops, Vertex};
pub use init::{generate_instance, prioritized_initial, sequential_initial};
pub use plan::{AgentAction, Configuration, FleetAction, Instance, Plan};
pub use search::{alternated_search, neighborhood_search, SearchReport};
