use serde::{Deserialize, Serialize};

use super::RevisionError;
use crate::engine::{order_by_weight, ActionId, Catalog, SearchLimits, Visit};
use crate::knowledge::KnowledgeBase;
use crate::learning::Partition;
use crate::trace::ExplorationTrace;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStats {
    pub problem: String,
    pub best_satisfaction: f64,
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub stats: ReplayStats,
    pub truncated: bool,
    /// Filled only when requested.
    pub visits: Vec<Visit>,
}

/// A trace flattened for fast replays. Node `i`'s child under action `a` is
/// `children[i * actions + a]`.
#[derive(Debug, Clone)]
pub struct PreparedTrace {
    pub problem: String,
    actions: usize,
    limits: SearchLimits,
    threshold: f64,
    satisfaction: Vec<f64>,
    valid: Vec<bool>,
    /// The expanded occurrence of each node's state (itself unless a stub).
    identity: Vec<u32>,
    expandable: Vec<bool>,
    children: Vec<u32>,
    /// Area index per (node, action); only set for expandable nodes.
    areas: Vec<u32>,
}

impl PreparedTrace {
    /// Flattens `trace`. Area ids are resolved against `partition` when one
    /// is given.
    pub fn new(
        trace: &ExplorationTrace,
        partition: Option<&Partition>,
        allow_incomplete: bool,
    ) -> Result<Self, RevisionError> {
        if !trace.complete && !allow_incomplete {
            return Err(RevisionError::Incomplete(trace.problem_id.clone()));
        }
        if trace.nodes.is_empty() {
            return Err(RevisionError::EmptyTrace(trace.problem_id.clone()));
        }
        let actions = trace.catalog.actions.len();
        let n = trace.nodes.len();
        let mut children = vec![NONE; n * actions];
        let mut expandable = vec![false; n];
        for node in &trace.nodes[1..] {
            if let (Some(p), Some(a)) = (node.parent, node.action) {
                children[p * actions + a] = node.id as u32;
                expandable[p] = true;
            }
        }
        let mut areas = vec![NONE; n * actions];
        if let Some(partition) = partition {
            for (i, node) in trace.nodes.iter().enumerate() {
                if !expandable[i] {
                    continue;
                }
                for (a, spec) in trace.catalog.actions.iter().enumerate() {
                    let values = &node.measures[spec.measure_set];
                    let area =
                        partition
                            .area_of(a, values)
                            .ok_or_else(|| RevisionError::NoArea {
                                problem: trace.problem_id.clone(),
                                node: i,
                                action: spec.name.clone(),
                            })?;
                    areas[i * actions + a] = area as u32;
                }
            }
        }
        Ok(PreparedTrace {
            problem: trace.problem_id.clone(),
            actions,
            limits: trace.limits,
            threshold: trace.perfect_threshold,
            satisfaction: trace.nodes.iter().map(|n| n.satisfaction).collect(),
            valid: trace.nodes.iter().map(|n| n.valid).collect(),
            identity: trace
                .nodes
                .iter()
                .map(|n| n.duplicate_of.unwrap_or(n.id) as u32)
                .collect(),
            expandable,
            children,
            areas,
        })
    }

    pub fn len(&self) -> usize {
        self.satisfaction.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satisfaction.is_empty()
    }

    pub fn area(&self, node: usize, action: ActionId) -> usize {
        self.areas[node * self.actions + action] as usize
    }

    /// Normal-mode search over the recorded tree. `weight(node, action)` is
    /// asked for each action of every state whose action list is built;
    /// `node` is always an expanded trace node.
    pub fn run<W: FnMut(usize, ActionId) -> u32>(
        &self,
        mut weight: W,
        record: bool,
    ) -> ReplayOutcome {
        struct Frame {
            node: usize,
            visit: usize,
            depth: usize,
            actions: Vec<ActionId>,
            next: usize,
        }
        let mut expanded = vec![false; self.len()];
        let mut visits = Vec::new();
        let mut states = 0usize;
        let mut best = f64::NEG_INFINITY;
        let mut truncated = false;
        let mut stack: Vec<Frame> = Vec::new();
        let mut pending = Some((0usize, None::<(usize, ActionId)>, 0usize));

        loop {
            if let Some((c, origin, depth)) = pending.take() {
                let visit = states;
                states += 1;
                let sat = self.satisfaction[c];
                if record {
                    visits.push(Visit {
                        parent: origin.map(|o| o.0),
                        action: origin.map(|o| o.1),
                        satisfaction: sat,
                        depth,
                    });
                }
                if sat > best {
                    best = sat;
                }
                if sat >= self.threshold {
                    break;
                }
                let id = self.identity[c] as usize;
                if !expanded[id] && self.valid[c] && self.expandable[id] {
                    let weighted = (0..self.actions)
                        .filter_map(|a| {
                            let w = weight(id, a);
                            (w >= 1).then_some((w, a))
                        })
                        .collect();
                    let actions = order_by_weight(weighted);
                    if !actions.is_empty() {
                        if depth >= self.limits.max_depth {
                            truncated = true;
                        } else {
                            expanded[id] = true;
                            stack.push(Frame {
                                node: id,
                                visit,
                                depth,
                                actions,
                                next: 0,
                            });
                        }
                    }
                }
            }
            let Some(top) = stack.last_mut() else {
                break;
            };
            if top.next == top.actions.len() {
                stack.pop();
                continue;
            }
            let a = top.actions[top.next];
            top.next += 1;
            if states >= self.limits.max_states {
                truncated = true;
                break;
            }
            let child = self.children[top.node * self.actions + a];
            if child == NONE {
                // Only reachable on incomplete traces: the recorded tree
                // stops here.
                truncated = true;
                continue;
            }
            pending = Some((child as usize, Some((top.visit, a)), top.depth + 1));
        }
        ReplayOutcome {
            stats: ReplayStats {
                problem: self.problem.clone(),
                best_satisfaction: best,
                states,
            },
            truncated,
            visits,
        }
    }

    /// Replay under a weight table indexed `weights[offsets[action] + area]`,
    /// marking every coordinate consulted in `queried`.
    pub(crate) fn run_weights(
        &self,
        weights: &[u32],
        offsets: &[usize],
        queried: Option<&mut Vec<bool>>,
    ) -> ReplayStats {
        match queried {
            Some(q) => {
                q.iter_mut().for_each(|b| *b = false);
                self.run(
                    |node, a| {
                        let c = offsets[a] + self.area(node, a);
                        q[c] = true;
                        weights[c]
                    },
                    false,
                )
                .stats
            }
            None => {
                self.run(|node, a| weights[offsets[a] + self.area(node, a)], false)
                    .stats
            }
        }
    }
}

/// Replays `trace` as a normal-mode run with `kb`.
pub fn replay_kb(
    trace: &ExplorationTrace,
    kb: &KnowledgeBase,
    allow_incomplete: bool,
    record: bool,
) -> Result<ReplayOutcome, RevisionError> {
    let prepared = PreparedTrace::new(trace, None, allow_incomplete)?;
    let compiled = compile(kb, &trace.catalog)?;
    let mut failure = None;
    let outcome = prepared.run(
        |node, a| {
            let set = trace.catalog.actions[a].measure_set;
            compiled[a]
                .propose(&trace.nodes[node].measures[set])
                .unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    0
                })
        },
        record,
    );
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(outcome),
    }
}

fn compile(
    kb: &KnowledgeBase,
    catalog: &Catalog,
) -> Result<Vec<crate::knowledge::CompiledRuleBase>, RevisionError> {
    kb.bind(catalog)?;
    catalog
        .actions
        .iter()
        .map(|a| {
            let rb = kb.rule_base(&a.name).expect("bound above");
            Ok(rb.compile(&catalog.measure_sets[a.measure_set].measures)?)
        })
        .collect()
}
