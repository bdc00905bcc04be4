use std::collections::HashMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::perf::{perf, perf_value, PerfReport};
use super::replay::{PreparedTrace, ReplayStats};
use super::RevisionError;
use crate::engine::ActionId;
use crate::knowledge::{aggregate, KnowledgeBase, RuleBase};
use crate::learning::Partition;

/// One weight per area per action: `weights[action][area]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub weight_max: u32,
    pub weights: Vec<Vec<u32>>,
}

impl Solution {
    pub fn new(weight_max: u32, weights: Vec<Vec<u32>>) -> Result<Self, RevisionError> {
        if let Some(w) = weights.iter().flatten().find(|&&w| w > weight_max) {
            return Err(RevisionError::WeightOutOfRange {
                weight: *w,
                weight_max,
            });
        }
        Ok(Solution {
            weight_max,
            weights,
        })
    }

    pub fn zeros(partition: &Partition, weight_max: u32) -> Self {
        Solution {
            weight_max,
            weights: partition
                .actions
                .iter()
                .map(|a| vec![0; a.areas.len()])
                .collect(),
        }
    }

    /// Each area gets the weight of the initial rule it refines.
    pub fn embed(partition: &Partition, kb: &KnowledgeBase) -> Self {
        Solution {
            weight_max: kb.weight_max,
            weights: partition.embed(kb),
        }
    }

    pub fn coordinates(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    /// Number of distinct solutions with this shape, `(1 + weight_max)^areas`.
    pub fn space_size(&self) -> f64 {
        (1.0 + self.weight_max as f64).powi(self.coordinates() as i32)
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.weights
            .iter()
            .map(|w| {
                let o = acc;
                acc += w.len();
                o
            })
            .collect()
    }

    fn flat(&self) -> Vec<u32> {
        self.weights.iter().flatten().copied().collect()
    }

    fn reshaped(&self, flat: &[u32]) -> Solution {
        let mut rest = flat;
        let weights = self
            .weights
            .iter()
            .map(|w| {
                let (head, tail) = rest.split_at(w.len());
                rest = tail;
                head.to_vec()
            })
            .collect();
        Solution {
            weight_max: self.weight_max,
            weights,
        }
    }

    /// One rule per area with a positive weight, then aggregated.
    pub fn to_knowledge(&self, partition: &Partition) -> KnowledgeBase {
        let rule_bases = partition
            .actions
            .iter()
            .zip(&self.weights)
            .map(|(aa, ws)| {
                let rules = aa
                    .areas
                    .iter()
                    .zip(ws)
                    .filter(|(_, &w)| w > 0)
                    .map(|(area, &w)| area.to_rule(&aa.measure_names, w))
                    .collect();
                aggregate(&RuleBase::new(&aa.action_name, &aa.measure_set, rules))
            })
            .collect();
        KnowledgeBase::new(self.weight_max, rule_bases)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub action: ActionId,
    pub area: usize,
    /// `-1` or `+1`.
    pub delta: i32,
}

/// All `±1` changes of a single weight that stay in `0..=weight_max`, in
/// (action, area, delta) order.
pub fn neighborhood(solution: &Solution) -> Vec<Move> {
    let mut moves = Vec::new();
    for (action, ws) in solution.weights.iter().enumerate() {
        for (area, &w) in ws.iter().enumerate() {
            if w > 0 {
                moves.push(Move {
                    action,
                    area,
                    delta: -1,
                });
            }
            if w < solution.weight_max {
                moves.push(Move {
                    action,
                    area,
                    delta: 1,
                });
            }
        }
    }
    moves
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSchedule {
    pub max_iterations: usize,
    pub initial_tenure: f64,
    pub tenure_increase: f64,
    pub tenure_decrease: f64,
    /// Iterations without a repetition before the tenure shrinks.
    pub decrease_after: usize,
    pub repetition_horizon: usize,
    pub stagnation_limit: usize,
    /// Weights redrawn when restarting from the best solution.
    pub perturbation: usize,
    pub seed: u64,
}

impl Default for SearchSchedule {
    fn default() -> Self {
        SearchSchedule {
            max_iterations: 5000,
            initial_tenure: 4.0,
            tenure_increase: 1.3,
            tenure_decrease: 0.9,
            decrease_after: 50,
            repetition_horizon: 2000,
            stagnation_limit: 200,
            perturbation: 3,
            seed: 1,
        }
    }
}

impl SearchSchedule {
    pub fn check(&self) -> Result<(), RevisionError> {
        let bad = |what: &str| Err(RevisionError::Schedule(what.to_string()));
        if !(self.initial_tenure.is_finite() && self.initial_tenure >= 1.0) {
            return bad("initial_tenure must be at least 1");
        }
        if !(self.tenure_increase.is_finite() && self.tenure_increase > 1.0) {
            return bad("tenure_increase must be greater than 1");
        }
        if !(self.tenure_decrease > 0.0 && self.tenure_decrease < 1.0) {
            return bad("tenure_decrease must lie in (0, 1)");
        }
        if self.decrease_after == 0 || self.repetition_horizon == 0 || self.stagnation_limit == 0 {
            return bad("decrease_after, repetition_horizon and stagnation_limit must be positive");
        }
        if self.perturbation == 0 {
            return bad("perturbation must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLogEntry {
    pub iteration: usize,
    pub action: ActionId,
    pub area: usize,
    pub delta: i32,
    /// Objective of the solution after the move.
    pub objective: f64,
    pub best: f64,
    pub tenure: f64,
    /// The search restarted from a perturbed best after this move.
    pub restart: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Solution,
    pub report: PerfReport,
    pub initial_report: PerfReport,
    pub log: Vec<SearchLogEntry>,
    /// Objective evaluations not served from the memo.
    pub evaluations: usize,
}

const MEMO_CAPACITY: usize = 200_000;

struct Current {
    weights: Vec<u32>,
    stats: Vec<(f64, usize)>,
    queried: Vec<Vec<bool>>,
    objective: f64,
}

struct Evaluator<'a> {
    traces: &'a [PreparedTrace],
    offsets: Vec<usize>,
    coords: usize,
    memo: HashMap<Vec<u32>, f64>,
    evaluations: usize,
}

impl Evaluator<'_> {
    fn objective(stats: &[(f64, usize)]) -> f64 {
        let n = stats.len() as f64;
        let sat = stats.iter().map(|s| s.0).sum::<f64>() / n;
        let states = stats.iter().map(|s| s.1 as f64).sum::<f64>() / n;
        perf_value(sat, states)
    }

    fn remember(&mut self, weights: &[u32], objective: f64) {
        if self.memo.len() >= MEMO_CAPACITY {
            self.memo.clear();
        }
        self.memo.insert(weights.to_vec(), objective);
    }

    fn full(&mut self, weights: Vec<u32>) -> Current {
        let mut queried = vec![vec![false; self.coords]; self.traces.len()];
        let stats: Vec<(f64, usize)> = self
            .traces
            .iter()
            .zip(&mut queried)
            .map(|(t, q)| {
                let s = t.run_weights(&weights, &self.offsets, Some(q));
                (s.best_satisfaction, s.states)
            })
            .collect();
        let objective = Self::objective(&stats);
        self.evaluations += 1;
        self.remember(&weights, objective);
        Current {
            weights,
            stats,
            queried,
            objective,
        }
    }

    /// Objective of `cur` with coordinate `coord` set to `value`. Only
    /// traces whose replay consulted `coord` can change.
    fn candidate(&mut self, cur: &mut Current, coord: usize, value: u32) -> f64 {
        let old = cur.weights[coord];
        cur.weights[coord] = value;
        if let Some(&o) = self.memo.get(&cur.weights) {
            cur.weights[coord] = old;
            return o;
        }
        let mut stats = cur.stats.clone();
        for (i, t) in self.traces.iter().enumerate() {
            if cur.queried[i][coord] {
                let s = t.run_weights(&cur.weights, &self.offsets, None);
                stats[i] = (s.best_satisfaction, s.states);
            }
        }
        let objective = Self::objective(&stats);
        self.evaluations += 1;
        self.remember(&cur.weights, objective);
        cur.weights[coord] = old;
        objective
    }

    fn apply(&mut self, cur: &mut Current, coord: usize, value: u32) {
        cur.weights[coord] = value;
        for (i, t) in self.traces.iter().enumerate() {
            if cur.queried[i][coord] {
                let s = t.run_weights(&cur.weights, &self.offsets, Some(&mut cur.queried[i]));
                cur.stats[i] = (s.best_satisfaction, s.states);
            }
        }
        cur.objective = Self::objective(&cur.stats);
        self.remember(&cur.weights, cur.objective);
    }
}

fn report(traces: &[PreparedTrace], stats: &[(f64, usize)]) -> Result<PerfReport, RevisionError> {
    let stats: Vec<ReplayStats> = traces
        .iter()
        .zip(stats)
        .map(|(t, &(best_satisfaction, states))| ReplayStats {
            problem: t.problem.clone(),
            best_satisfaction,
            states,
        })
        .collect();
    perf(&stats)
}

/// Tabu search over single-weight moves whose tenure grows when solutions
/// recur and shrinks when they don't, with restarts from a perturbed best
/// solution after `stagnation_limit` non-improving iterations. The objective
/// is Perf over replays of `traces`, which must carry area ids for the
/// partition `initial` is shaped after. Returns the best solution visited.
pub fn reactive_local_search(
    initial: &Solution,
    traces: &[PreparedTrace],
    schedule: &SearchSchedule,
) -> Result<SearchResult, RevisionError> {
    schedule.check()?;
    if traces.is_empty() {
        return Err(RevisionError::NoProblems);
    }
    let coords = initial.coordinates();
    let mut eval = Evaluator {
        traces,
        offsets: initial.offsets(),
        coords,
        memo: HashMap::new(),
        evaluations: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut cur = eval.full(initial.flat());
    let initial_report = report(traces, &cur.stats)?;
    let mut best = (cur.weights.clone(), cur.stats.clone(), cur.objective);

    let mut coord_of = Vec::with_capacity(coords);
    for (action, ws) in initial.weights.iter().enumerate() {
        coord_of.extend((0..ws.len()).map(|area| (action, area)));
    }
    let max_tenure = coords.saturating_sub(1) as f64;
    let clamp = |t: f64| t.min(max_tenure).max(1.0_f64.min(max_tenure));
    let mut tenure = clamp(schedule.initial_tenure);
    let mut last_moved: Vec<Option<usize>> = vec![None; coords];
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    seen.insert(cur.weights.clone(), 0);
    let mut quiet_since = 0usize;
    let mut stagnation = 0usize;
    let mut log = Vec::new();

    for iteration in 1..=schedule.max_iterations {
        let moves: Vec<(usize, u32)> = (0..coords)
            .flat_map(|c| {
                let w = cur.weights[c];
                let down = (w > 0).then(|| (c, w - 1));
                let up = (w < initial.weight_max).then(|| (c, w + 1));
                down.into_iter().chain(up)
            })
            .collect();
        if moves.is_empty() {
            break;
        }
        let scored: Vec<(usize, u32, f64)> = moves
            .iter()
            .map(|&(c, v)| (c, v, eval.candidate(&mut cur, c, v)))
            .collect();
        let is_tabu =
            |c: usize| last_moved[c].is_some_and(|at| ((iteration - at) as f64) < tenure.round());
        let admissible: Vec<&(usize, u32, f64)> = scored
            .iter()
            .filter(|(c, _, o)| !is_tabu(*c) || *o > best.2)
            .collect();
        let (coord, value, _) = if admissible.is_empty() {
            // Everything is tabu: take the move released soonest.
            *scored
                .iter()
                .min_by_key(|(c, _, _)| last_moved[*c])
                .unwrap_or(&scored[0])
        } else {
            let top = admissible
                .iter()
                .map(|m| m.2)
                .fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<&&(usize, u32, f64)> = admissible.iter().filter(|m| m.2 == top).collect();
            **ties[rng.gen_range(0..ties.len())]
        };
        let delta = value as i32 - cur.weights[coord] as i32;
        eval.apply(&mut cur, coord, value);
        last_moved[coord] = Some(iteration);

        match seen.insert(cur.weights.clone(), iteration) {
            Some(at) if iteration - at <= schedule.repetition_horizon => {
                tenure = clamp(tenure * schedule.tenure_increase);
                quiet_since = iteration;
            }
            _ if iteration - quiet_since >= schedule.decrease_after => {
                tenure = clamp(tenure * schedule.tenure_decrease);
                quiet_since = iteration;
            }
            _ => {}
        }

        if cur.objective > best.2 {
            best = (cur.weights.clone(), cur.stats.clone(), cur.objective);
            stagnation = 0;
        } else {
            stagnation += 1;
        }
        let restart = stagnation >= schedule.stagnation_limit;
        let (action, area) = coord_of[coord];
        log.push(SearchLogEntry {
            iteration,
            action,
            area,
            delta,
            objective: cur.objective,
            best: best.2,
            tenure,
            restart,
        });
        if restart {
            let mut weights = best.0.clone();
            for c in sample(&mut rng, coords, schedule.perturbation.min(coords)) {
                weights[c] = rng.gen_range(0..=initial.weight_max);
            }
            cur = eval.full(weights);
            last_moved.iter_mut().for_each(|m| *m = None);
            stagnation = 0;
            if cur.objective > best.2 {
                best = (cur.weights.clone(), cur.stats.clone(), cur.objective);
            }
        }
    }

    Ok(SearchResult {
        best: initial.reshaped(&best.0),
        report: report(traces, &best.1)?,
        initial_report,
        log,
        evaluations: eval.evaluations,
    })
}
