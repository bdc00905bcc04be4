//! The action cycle: informed depth-first search over a problem domain.
//!
//! Each evaluated state is scored, checked against the stopping criterion,
//! checked for duplication and validity, and, if it survives, expanded with
//! an ordered action list. In normal mode the list holds the actions whose
//! proposed weight is at least 1, heaviest first with catalog order breaking
//! ties. In minimal-pruning mode every action is tried in catalog order, the
//! search never stops early on a perfect state, and every generated state is
//! recorded as a [`TraceNode`].

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{KnowledgeBase, KnowledgeError};
use crate::trace::TraceNode;

pub type ActionId = usize;
pub type MeasureSetId = usize;

pub const PERFECT_SATISFACTION: f64 = 10.0;
pub const PERFECT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct DomainError(pub String);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("domain evaluation failed at state {state}: {source}")]
    Domain { state: usize, source: DomainError },
    #[error("knowledge base: {0}")]
    Knowledge(#[from] KnowledgeError),
    #[error("invalid search limits: {0}")]
    Limits(String),
}

/// Satisfaction of a state, in `[1, 10]`; 10 is perfect.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Satisfaction(f64);

impl Satisfaction {
    pub fn new(value: f64) -> Result<Self, DomainError> {
        if (1.0..=PERFECT_SATISFACTION).contains(&value) {
            Ok(Satisfaction(value))
        } else {
            Err(DomainError(format!("satisfaction {value} outside [1, 10]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub name: String,
    pub measure_set: MeasureSetId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSetSpec {
    pub name: String,
    pub measures: Vec<String>,
}

/// Actions and measure sets of a domain. Several actions may share a
/// measure set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub actions: Vec<ActionSpec>,
    pub measure_sets: Vec<MeasureSetSpec>,
}

impl Catalog {
    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn measure_set_of(&self, action: ActionId) -> &MeasureSetSpec {
        &self.measure_sets[self.actions[action].measure_set]
    }
}

/// A problem instance the action cycle can search.
///
/// Implementations must be deterministic: applying the same action to the
/// same state always yields the same state.
pub trait ProblemDomain {
    type State: Clone;
    type Key: Eq + Hash + Clone;

    fn domain_id(&self) -> &str;
    fn catalog(&self) -> &Catalog;
    fn satisfaction(&self, state: &Self::State) -> Result<Satisfaction, DomainError>;
    fn measures(&self, state: &Self::State, set: MeasureSetId) -> Result<Vec<f64>, DomainError>;
    fn apply(&self, state: &Self::State, action: ActionId) -> Result<Self::State, DomainError>;
    /// Canonical identity used for duplicate detection.
    fn state_key(&self, state: &Self::State) -> Self::Key;
    fn is_valid(
        &self,
        state: &Self::State,
        satisfaction: Satisfaction,
        parent: Option<(&Self::State, Satisfaction)>,
    ) -> bool;

    /// States with no applicable action; their action list is always empty.
    fn is_terminal(&self, _state: &Self::State) -> bool {
        false
    }

    fn perfect_threshold(&self) -> f64 {
        PERFECT_SATISFACTION - PERFECT_EPSILON
    }
}

/// Source of action weights for a state, given the measure vector of the
/// action's measure set.
pub trait ActionGuide {
    fn weight(&self, action: ActionId, measures: &[f64]) -> Result<u32, KnowledgeError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_states: usize,
    pub max_depth: usize,
}

impl SearchLimits {
    pub fn new(max_states: usize, max_depth: usize) -> Result<Self, EngineError> {
        let limits = SearchLimits {
            max_states,
            max_depth,
        };
        limits.check()?;
        Ok(limits)
    }

    pub fn check(&self) -> Result<(), EngineError> {
        if self.max_states == 0 || self.max_depth == 0 {
            return Err(EngineError::Limits(format!(
                "max_states {} and max_depth {} must both be at least 1",
                self.max_states, self.max_depth
            )));
        }
        Ok(())
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_states: 20_000,
            max_depth: 512,
        }
    }
}

#[derive(Clone, Copy)]
pub enum SearchMode<'a> {
    Normal(&'a dyn ActionGuide),
    MinimalPruning,
}

/// One evaluated state, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub parent: Option<usize>,
    pub action: Option<ActionId>,
    pub satisfaction: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Index into `visits` of the best state (earliest on ties).
    pub best: usize,
    pub best_satisfaction: f64,
    pub states_evaluated: usize,
    pub visits: Vec<Visit>,
    /// A limit cut the search short.
    pub truncated: bool,
    /// Every generated state, present in minimal-pruning mode.
    pub trace: Option<Vec<TraceNode>>,
}

/// Runs the action cycle with `kb` in `Normal` mode, or ignoring it in
/// minimal-pruning mode.
pub fn run<D: ProblemDomain>(
    domain: &D,
    initial: D::State,
    kb: &KnowledgeBase,
    limits: SearchLimits,
    minimal_pruning: bool,
) -> Result<SearchOutcome, EngineError> {
    let bound = kb.bind(domain.catalog())?;
    let mode = if minimal_pruning {
        SearchMode::MinimalPruning
    } else {
        SearchMode::Normal(&bound)
    };
    run_with(domain, initial, mode, limits)
}

pub fn run_with<D: ProblemDomain>(
    domain: &D,
    initial: D::State,
    mode: SearchMode<'_>,
    limits: SearchLimits,
) -> Result<SearchOutcome, EngineError> {
    limits.check()?;
    let mut cycle = Cycle {
        domain,
        mode,
        limits,
        threshold: domain.perfect_threshold(),
        visits: Vec::new(),
        nodes: Vec::new(),
        expanded: HashMap::new(),
        truncated: false,
        best: 0,
    };
    cycle.search(initial)?;
    let best_satisfaction = cycle.visits[cycle.best].satisfaction;
    let minimal = matches!(mode, SearchMode::MinimalPruning);
    Ok(SearchOutcome {
        best: cycle.best,
        best_satisfaction,
        states_evaluated: cycle.visits.len(),
        visits: cycle.visits,
        truncated: cycle.truncated,
        trace: minimal.then_some(cycle.nodes),
    })
}

struct Frame<S> {
    id: usize,
    state: S,
    satisfaction: Satisfaction,
    depth: usize,
    actions: Vec<ActionId>,
    next: usize,
}

enum Step<S> {
    Stop,
    Backtrack,
    Expand(Frame<S>),
}

struct Cycle<'a, D: ProblemDomain> {
    domain: &'a D,
    mode: SearchMode<'a>,
    limits: SearchLimits,
    threshold: f64,
    visits: Vec<Visit>,
    nodes: Vec<TraceNode>,
    /// Key of every expanded state, mapped to the id it was expanded under.
    expanded: HashMap<D::Key, usize>,
    truncated: bool,
    best: usize,
}

impl<D: ProblemDomain> Cycle<'_, D> {
    fn search(&mut self, initial: D::State) -> Result<(), EngineError> {
        let mut stack = match self.evaluate(initial, None, 0)? {
            Step::Expand(frame) => vec![frame],
            Step::Stop | Step::Backtrack => return Ok(()),
        };
        while let Some(top) = stack.last_mut() {
            if top.next == top.actions.len() {
                stack.pop();
                continue;
            }
            let action = top.actions[top.next];
            top.next += 1;
            if self.visits.len() >= self.limits.max_states {
                self.truncated = true;
                return Ok(());
            }
            let child =
                self.domain
                    .apply(&top.state, action)
                    .map_err(|source| EngineError::Domain {
                        state: top.id,
                        source,
                    })?;
            let parent = (top.id, top.state.clone(), top.satisfaction);
            let depth = top.depth + 1;
            match self.evaluate(child, Some((parent, action)), depth)? {
                Step::Stop => return Ok(()),
                Step::Backtrack => {}
                Step::Expand(frame) => stack.push(frame),
            }
        }
        Ok(())
    }

    #[allow(clippy::type_complexity)]
    fn evaluate(
        &mut self,
        state: D::State,
        origin: Option<((usize, D::State, Satisfaction), ActionId)>,
        depth: usize,
    ) -> Result<Step<D::State>, EngineError> {
        let id = self.visits.len();
        let fail = |source| EngineError::Domain { state: id, source };
        let satisfaction = self.domain.satisfaction(&state).map_err(fail)?;
        let sat = satisfaction.value();
        self.visits.push(Visit {
            parent: origin.as_ref().map(|((p, _, _), _)| *p),
            action: origin.as_ref().map(|(_, a)| *a),
            satisfaction: sat,
            depth,
        });
        if sat > self.visits[self.best].satisfaction {
            self.best = id;
        }

        let key = self.domain.state_key(&state);
        let duplicate_of = self.expanded.get(&key).copied();
        let valid = self.domain.is_valid(
            &state,
            satisfaction,
            origin.as_ref().map(|((_, s, ps), _)| (s, *ps)),
        );
        let minimal = matches!(self.mode, SearchMode::MinimalPruning);
        if minimal {
            let catalog = self.domain.catalog();
            let measures = (0..catalog.measure_sets.len())
                .map(|set| self.measures(&state, set, id))
                .collect::<Result<Vec<_>, _>>()?;
            self.nodes.push(TraceNode {
                id,
                parent: origin.as_ref().map(|((p, _, _), _)| *p),
                action: origin.as_ref().map(|(_, a)| *a),
                satisfaction: sat,
                valid,
                duplicate_of,
                measures,
                depth,
            });
        }

        if sat >= self.threshold {
            return Ok(if minimal { Step::Backtrack } else { Step::Stop });
        }
        if duplicate_of.is_some() || !valid {
            return Ok(Step::Backtrack);
        }
        let actions = self.action_list(&state, id)?;
        if actions.is_empty() {
            return Ok(Step::Backtrack);
        }
        if depth >= self.limits.max_depth {
            self.truncated = true;
            return Ok(Step::Backtrack);
        }
        self.expanded.insert(key, id);
        Ok(Step::Expand(Frame {
            id,
            state,
            satisfaction,
            depth,
            actions,
            next: 0,
        }))
    }

    fn measures(
        &self,
        state: &D::State,
        set: MeasureSetId,
        id: usize,
    ) -> Result<Vec<f64>, EngineError> {
        let values = self
            .domain
            .measures(state, set)
            .map_err(|source| EngineError::Domain { state: id, source })?;
        let spec = &self.domain.catalog().measure_sets[set];
        if values.len() != spec.measures.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::Domain {
                state: id,
                source: DomainError(format!(
                    "measure set `{}` expects {} finite values, got {values:?}",
                    spec.name,
                    spec.measures.len()
                )),
            });
        }
        Ok(values)
    }

    fn action_list(&self, state: &D::State, id: usize) -> Result<Vec<ActionId>, EngineError> {
        if self.domain.is_terminal(state) {
            return Ok(Vec::new());
        }
        let catalog = self.domain.catalog();
        match self.mode {
            SearchMode::MinimalPruning => Ok((0..catalog.actions.len()).collect()),
            SearchMode::Normal(guide) => {
                let mut cache: Vec<Option<Vec<f64>>> = vec![None; catalog.measure_sets.len()];
                let mut weighted = Vec::new();
                for (action, spec) in catalog.actions.iter().enumerate() {
                    let slot = &mut cache[spec.measure_set];
                    if slot.is_none() {
                        *slot = Some(self.measures(state, spec.measure_set, id)?);
                    }
                    let w = guide.weight(action, slot.as_deref().unwrap_or_default())?;
                    if w >= 1 {
                        weighted.push((w, action));
                    }
                }
                Ok(order_by_weight(weighted))
            }
        }
    }
}

/// Heaviest first; the sort is stable so catalog order breaks ties.
pub fn order_by_weight(mut weighted: Vec<(u32, ActionId)>) -> Vec<ActionId> {
    weighted.sort_by_key(|w| std::cmp::Reverse(w.0));
    weighted.into_iter().map(|(_, a)| a).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::{HashSet, VecDeque};

    use proptest::prelude::*;

    use super::*;
    use crate::domains::maze::{
        maze_expert_kb, maze_noaction_kb, Heading, MazeDomain, MazeProblem, Pose,
    };
    use crate::domains::synthetic::{
        node_count, synthetic_catalog, SyntheticDomain, SyntheticProblem,
    };
    use crate::knowledge::{Rule, RuleBase};

    fn corridor(len: usize, start: Pose) -> MazeDomain {
        MazeDomain::new(MazeProblem {
            width: len,
            height: 1,
            walls: vec![],
            exit: (len - 1, 0),
            start,
        })
        .unwrap()
    }

    fn east(x: usize) -> Pose {
        Pose {
            x,
            y: 0,
            heading: Heading::E,
        }
    }

    fn synthetic(b: usize, d: usize, sats: &[f64]) -> SyntheticDomain {
        SyntheticDomain::new(SyntheticProblem::with_satisfactions(b, d, sats.to_vec())).unwrap()
    }

    /// Constant weight per action.
    fn flat_kb(catalog: &Catalog, weights: &[u32]) -> KnowledgeBase {
        KnowledgeBase::new(
            5,
            catalog
                .actions
                .iter()
                .zip(weights)
                .map(|(a, &w)| RuleBase::new(&a.name, "node", vec![Rule::new(vec![], w)]))
                .collect(),
        )
    }

    #[test]
    fn start_on_exit_evaluates_one_state() {
        let d = corridor(3, east(2));
        for minimal in [false, true] {
            let out = run(
                &d,
                east(2),
                &maze_expert_kb(),
                SearchLimits::default(),
                minimal,
            )
            .unwrap();
            assert_eq!(out.states_evaluated, 1);
            assert_eq!(out.best_satisfaction, 10.0);
            assert!(!out.truncated);
        }
    }

    #[test]
    fn zero_weights_evaluate_one_state() {
        let d = corridor(6, east(0));
        let out = run(
            &d,
            east(0),
            &maze_noaction_kb(),
            SearchLimits::default(),
            false,
        )
        .unwrap();
        assert_eq!(out.states_evaluated, 1);
        assert_eq!(out.best_satisfaction, 5.0);
        assert!(out.trace.is_none());
    }

    #[test]
    fn expert_walks_straight_down_a_corridor() {
        let d = corridor(5, east(0));
        let out = run(
            &d,
            east(0),
            &maze_expert_kb(),
            SearchLimits::default(),
            false,
        )
        .unwrap();
        assert_eq!(out.states_evaluated, 5);
        assert_eq!(out.best_satisfaction, 10.0);
        assert!(out.visits.iter().skip(1).all(|v| v.action == Some(0)));
    }

    /// Poses reachable without going through the exit, which is never
    /// expanded.
    fn expandable_poses(d: &MazeDomain, start: Pose) -> usize {
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut count = 0;
        while let Some(p) = queue.pop_front() {
            if d.satisfaction(&p).unwrap().value() >= PERFECT_SATISFACTION - PERFECT_EPSILON {
                continue;
            }
            count += 1;
            for a in 0..3 {
                let q = d.apply(&p, a).unwrap();
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        count
    }

    #[test]
    fn minimal_pruning_node_count_matches_enumeration() {
        for len in [2, 3, 5] {
            let d = corridor(len, east(0));
            let out = run(
                &d,
                east(0),
                &maze_noaction_kb(),
                SearchLimits::default(),
                true,
            )
            .unwrap();
            let expected = 1 + 3 * expandable_poses(&d, east(0));
            assert_eq!(out.states_evaluated, expected, "corridor {len}");
            assert_eq!(out.trace.unwrap().len(), expected);
            assert!(!out.truncated);
        }
        assert_eq!(1 + 3 * expandable_poses(&corridor(3, east(0)), east(0)), 25);
    }

    #[test]
    fn depth_cap_truncates() {
        let d = corridor(3, east(0));
        let limits = SearchLimits::new(20_000, 1).unwrap();
        let out = run(&d, east(0), &maze_noaction_kb(), limits, true).unwrap();
        assert!(out.truncated);
        assert!(out.visits.iter().all(|v| v.depth <= 1));
        assert_eq!(out.states_evaluated, 4);
    }

    #[test]
    fn state_cap_stops_search() {
        let d = corridor(6, east(0));
        let limits = SearchLimits::new(7, 512).unwrap();
        let out = run(&d, east(0), &maze_noaction_kb(), limits, true).unwrap();
        assert!(out.truncated);
        assert_eq!(out.states_evaluated, 7);
    }

    #[test]
    fn zero_limits_rejected() {
        assert!(SearchLimits::new(0, 5).is_err());
        assert!(SearchLimits::new(5, 0).is_err());
    }

    #[test]
    fn weighted_depth_first_order() {
        //        0(1)
        //      /     \
        //    1(2)    2(3)
        //   /   \    /   \
        // 3(2.5) 4(4) 5(5) 6(6)
        let sats = [1.0, 2.0, 3.0, 2.5, 4.0, 5.0, 6.0];
        let d = synthetic(2, 2, &sats);
        let kb = flat_kb(&synthetic_catalog(2), &[1, 2]);
        let out = run(&d, 0, &kb, SearchLimits::default(), false).unwrap();
        let order: Vec<f64> = out.visits.iter().map(|v| v.satisfaction).collect();
        assert_eq!(order, vec![1.0, 3.0, 6.0, 5.0, 2.0, 4.0, 2.5]);
        assert_eq!(out.best, 2);
        assert_eq!(out.best_satisfaction, 6.0);
    }

    #[test]
    fn invalid_state_is_not_expanded() {
        // Node 2 does not improve on the root, so 5 and 6 are never generated.
        let sats = [1.0, 2.0, 1.0, 2.5, 4.0, 5.0, 6.0];
        let d = synthetic(2, 2, &sats);
        let kb = flat_kb(&synthetic_catalog(2), &[1, 2]);
        let out = run(&d, 0, &kb, SearchLimits::default(), false).unwrap();
        let order: Vec<f64> = out.visits.iter().map(|v| v.satisfaction).collect();
        assert_eq!(order, vec![1.0, 1.0, 2.0, 4.0, 2.5]);
    }

    #[test]
    fn perfect_state_stops_normal_search() {
        let sats = [1.0, 2.0, 10.0, 2.5, 4.0, 5.0, 6.0];
        let d = synthetic(2, 2, &sats);
        let kb = flat_kb(&synthetic_catalog(2), &[1, 1]);
        let out = run(&d, 0, &kb, SearchLimits::default(), false).unwrap();
        assert_eq!(out.states_evaluated, 5);
        assert_eq!(out.best_satisfaction, 10.0);
        let minimal = run(&d, 0, &kb, SearchLimits::default(), true).unwrap();
        assert_eq!(minimal.states_evaluated, 5);
    }

    #[test]
    fn increasing_chain_is_fully_explored() {
        let d = synthetic(1, 3, &[1.0, 2.0, 3.0, 4.0]);
        let out = run(
            &d,
            0,
            &flat_kb(&synthetic_catalog(1), &[0]),
            SearchLimits::default(),
            true,
        )
        .unwrap();
        let trace = out.trace.unwrap();
        assert_eq!(trace.len(), 4);
        for (i, n) in trace.iter().enumerate() {
            assert_eq!(n.parent, i.checked_sub(1));
            assert_eq!(n.depth, i);
            assert!(n.valid);
        }
    }

    /// Nodes a minimal-pruning run generates on a synthetic tree.
    fn synthetic_enumeration(b: usize, depth: usize, sats: &[f64]) -> usize {
        fn visit(
            i: usize,
            level: usize,
            b: usize,
            depth: usize,
            sats: &[f64],
            parent: Option<f64>,
        ) -> usize {
            let valid = parent.is_none_or(|p| sats[i] > p);
            if !valid || level == depth || sats[i] >= PERFECT_SATISFACTION - PERFECT_EPSILON {
                return 1;
            }
            1 + (0..b)
                .map(|k| visit(i * b + 1 + k, level + 1, b, depth, sats, Some(sats[i])))
                .sum::<usize>()
        }
        visit(0, 0, b, depth, sats, None)
    }

    fn arb_synthetic() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..=3, 0usize..=4).prop_flat_map(|(b, d)| {
            let n = node_count(b, d);
            (
                Just(b),
                Just(d),
                prop::collection::vec((10u32..=100).prop_map(|v| v as f64 / 10.0), n),
            )
        })
    }

    #[test]
    fn binary_tree_count_matches_enumeration() {
        let sats = [1.0, 2.0, 3.0, 2.5, 4.0, 5.0, 6.0];
        let d = synthetic(2, 2, &sats);
        let out = run(
            &d,
            0,
            &flat_kb(&synthetic_catalog(2), &[0, 0]),
            SearchLimits::default(),
            true,
        )
        .unwrap();
        assert_eq!(out.states_evaluated, 7);
        assert_eq!(synthetic_enumeration(2, 2, &sats), 7);
    }

    proptest! {
        #[test]
        fn minimal_count_matches_enumeration((b, depth, sats) in arb_synthetic()) {
            let d = synthetic(b, depth, &sats);
            let kb = flat_kb(&synthetic_catalog(b), &vec![0; b]);
            let out = run(&d, 0, &kb, SearchLimits::default(), true).unwrap();
            prop_assert_eq!(out.states_evaluated, synthetic_enumeration(b, depth, &sats));
        }

        #[test]
        fn trace_ignores_knowledge((b, depth, sats) in arb_synthetic(), w in prop::collection::vec(0u32..=5, 3)) {
            let d = synthetic(b, depth, &sats);
            let cat = synthetic_catalog(b);
            let a = run(&d, 0, &flat_kb(&cat, &vec![0; b]), SearchLimits::default(), true).unwrap();
            let c = run(&d, 0, &flat_kb(&cat, &w[..b]), SearchLimits::default(), true).unwrap();
            prop_assert_eq!(a, c);
        }

        #[test]
        fn runs_are_deterministic_and_well_formed(
            (b, depth, sats) in arb_synthetic(),
            w in prop::collection::vec(0u32..=5, 3),
            max_states in 1usize..40,
            max_depth in 1usize..5,
            minimal in any::<bool>(),
        ) {
            let d = synthetic(b, depth, &sats);
            let kb = flat_kb(&synthetic_catalog(b), &w[..b]);
            let limits = SearchLimits::new(max_states, max_depth).unwrap();
            let first = run(&d, 0, &kb, limits, minimal).unwrap();
            prop_assert_eq!(&first, &run(&d, 0, &kb, limits, minimal).unwrap());
            prop_assert!(first.states_evaluated <= max_states);
            prop_assert_eq!(first.states_evaluated, first.visits.len());
            for (i, v) in first.visits.iter().enumerate() {
                prop_assert!(v.depth <= max_depth);
                if let Some(p) = v.parent {
                    prop_assert!(p < i);
                    prop_assert_eq!(first.visits[p].depth + 1, v.depth);
                }
                prop_assert!(v.satisfaction <= first.best_satisfaction);
            }
            prop_assert_eq!(first.visits[first.best].satisfaction, first.best_satisfaction);
        }
    }

    #[test]
    fn order_by_weight_is_stable() {
        assert_eq!(
            order_by_weight(vec![(1, 0), (3, 1), (1, 2), (3, 3)]),
            vec![1, 3, 0, 2]
        );
        assert!(order_by_weight(vec![]).is_empty());
    }

    #[test]
    fn satisfaction_range_enforced() {
        assert!(Satisfaction::new(0.5).is_err());
        assert!(Satisfaction::new(10.5).is_err());
        assert!(Satisfaction::new(f64::NAN).is_err());
        assert_eq!(Satisfaction::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn domain_errors_name_the_state() {
        let d = synthetic(1, 1, &[1.0, 2.0]);
        // The leaf is terminal, so ask apply directly past it.
        assert!(d.apply(&1, 0).is_err());
        let bad = SyntheticDomain::new(SyntheticProblem::with_satisfactions(1, 1, vec![1.0, 0.2]))
            .unwrap();
        let err = run(
            &bad,
            0,
            &flat_kb(&synthetic_catalog(1), &[1]),
            SearchLimits::default(),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::Domain { state: 1, .. }));
    }
}
