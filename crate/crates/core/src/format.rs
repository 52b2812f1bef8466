//! JSON file formats for plans and instances.
//!
//! A plan file lists one configuration per time step, each row giving every
//! agent's vertex. Fleet actions are recovered by diffing consecutive rows
//! and validated against the graph on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MapfError, Result};
use crate::graph::DiGraph;
use crate::plan::{Configuration, Instance, Plan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub agent_count: usize,
    pub configurations: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub graph: GraphFile,
    pub start: Vec<usize>,
    pub target: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PlanFile {
    pub fn from_plan(plan: &Plan) -> Self {
        PlanFile {
            agent_count: plan.agent_count(),
            configurations: plan
                .trace()
                .iter()
                .map(|c| c.positions().iter().map(|v| v.index()).collect())
                .collect(),
        }
    }

    pub fn into_plan(self, graph: &DiGraph) -> Result<Plan> {
        if self.configurations.is_empty() {
            return Err(MapfError::Parse {
                line: 0,
                message: "plan has no configurations".into(),
            });
        }
        let mut trace = Vec::with_capacity(self.configurations.len());
        for row in &self.configurations {
            if row.len() != self.agent_count {
                return Err(MapfError::AgentCountMismatch {
                    expected: self.agent_count,
                    found: row.len(),
                });
            }
            let config = Configuration::from_indices(row)?;
            config.check_on(graph)?;
            trace.push(config);
        }
        Plan::from_trace(graph, trace)
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let indices = |c: &Configuration| c.positions().iter().map(|v| v.index()).collect();
        InstanceFile {
            graph: GraphFile {
                nodes: inst.graph.node_count(),
                edges: inst.graph.edge_list(),
            },
            start: indices(&inst.start),
            target: indices(&inst.target),
            seed: inst.seed,
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        let graph = DiGraph::new(self.graph.nodes, &self.graph.edges)?;
        let start = Configuration::from_indices(&self.start)?;
        let target = Configuration::from_indices(&self.target)?;
        Instance::new(graph, start, target, self.seed)
    }
}

pub fn plan_to_json(plan: &Plan) -> String {
    serde_json::to_string_pretty(&PlanFile::from_plan(plan)).expect("plan serializes")
}

pub fn plan_from_json(graph: &DiGraph, text: &str) -> Result<Plan> {
    serde_json::from_str::<PlanFile>(text)?.into_plan(graph)
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn read_plan(graph: &DiGraph, path: &Path) -> Result<Plan> {
    plan_from_json(graph, &fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(inst) + "\n")?;
    Ok(())
}

pub fn write_plan(path: &Path, plan: &Plan) -> Result<()> {
    fs::write(path, plan_to_json(plan) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{generate_instance, prioritized_initial};

    #[test]
    fn instance_and_plan_round_trip() {
        let inst = generate_instance(12, 3, 5).unwrap();
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back.graph.edge_list(), inst.graph.edge_list());
        assert_eq!(back.start, inst.start);
        assert_eq!(back.target, inst.target);
        assert_eq!(back.seed, Some(5));
        let plan = prioritized_initial(&inst, 5, 5).unwrap();
        let reloaded = plan_from_json(&inst.graph, &plan_to_json(&plan)).unwrap();
        assert_eq!(reloaded, plan);
    }

    #[test]
    fn bad_rows_are_rejected() {
        let g = DiGraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let ragged = r#"{"agent_count": 2, "configurations": [[0, 1], [1]]}"#;
        assert!(matches!(plan_from_json(&g, ragged), Err(MapfError::AgentCountMismatch { .. })));
        let jump = r#"{"agent_count": 1, "configurations": [[0], [2]]}"#;
        assert!(matches!(plan_from_json(&g, jump), Err(MapfError::InvalidStep { step: 1, .. })));
        let out_of_range = r#"{"agent_count": 1, "configurations": [[7]]}"#;
        assert!(plan_from_json(&g, out_of_range).is_err());
        assert!(plan_from_json(&g, "not json").is_err());
    }
}
