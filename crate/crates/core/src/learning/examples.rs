use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::paths::extract_best_paths;
use crate::engine::{ActionId, Catalog};
use crate::trace::ExplorationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Success,
    Failure,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Success => "success",
            Label::Failure => "failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub measures: Vec<f64>,
    pub label: Label,
    pub problem: String,
    pub node: usize,
    pub action: ActionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSet {
    pub action: ActionId,
    pub action_name: String,
    pub measure_names: Vec<String>,
    pub examples: Vec<Example>,
}

impl ExampleSet {
    pub fn values(&self, measure: usize) -> Vec<f64> {
        self.examples.iter().map(|e| e.measures[measure]).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// One row per example: measure columns, label, problem id, node id.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.measure_names {
            let _ = write!(out, "{m},");
        }
        out.push_str("label,problem,node\n");
        for e in &self.examples {
            for v in &e.measures {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{},{},{}", e.label.as_str(), e.problem, e.node);
        }
        out
    }
}

/// Labels, for every non-final state of every best path, each action that
/// generated a child of that state: success when the child is the next node
/// of the path, failure otherwise (duplicate stubs included).
pub fn build_example_sets(traces: &[ExplorationTrace], catalog: &Catalog) -> Vec<ExampleSet> {
    let mut sets: Vec<ExampleSet> = catalog
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| ExampleSet {
            action: i,
            action_name: a.name.clone(),
            measure_names: catalog.measure_sets[a.measure_set].measures.clone(),
            examples: Vec::new(),
        })
        .collect();
    for trace in traces {
        let children = trace.children();
        for path in extract_best_paths(trace) {
            for step in path.nodes.windows(2) {
                let (state, next) = (step[0], step[1]);
                for &child in &children[state] {
                    let Some(action) = trace.nodes[child].action else {
                        continue;
                    };
                    let set = catalog.actions[action].measure_set;
                    sets[action].examples.push(Example {
                        measures: trace.nodes[state].measures[set].clone(),
                        label: if child == next {
                            Label::Success
                        } else {
                            Label::Failure
                        },
                        problem: trace.problem_id.clone(),
                        node: state,
                        action,
                    });
                }
            }
        }
    }
    sets
}
