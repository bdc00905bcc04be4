use super::perf::{perf, PerfReport};
use super::replay::{replay_kb, PreparedTrace};
use super::search::{reactive_local_search, SearchLogEntry, SearchSchedule, Solution};
use super::RevisionError;
use crate::knowledge::KnowledgeBase;
use crate::learning::{build_example_sets, learn_cuts, ExampleSet, Partition};
use crate::trace::ExplorationTrace;

/// Everything a revision produced, in pipeline order.
#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub example_sets: Vec<ExampleSet>,
    /// `cuts[action][measure]`
    pub cuts: Vec<Vec<Vec<f64>>>,
    pub partition: Partition,
    pub initial_solution: Solution,
    pub best_solution: Solution,
    pub log: Vec<SearchLogEntry>,
    pub evaluations: usize,
    pub revised: KnowledgeBase,
    /// Replays of the training traces with the initial and revised bases.
    pub before: PerfReport,
    pub after: PerfReport,
}

/// Perf of `kb` over replays of `traces`.
pub fn replay_perf(
    traces: &[ExplorationTrace],
    kb: &KnowledgeBase,
    allow_incomplete: bool,
) -> Result<PerfReport, RevisionError> {
    let stats = traces
        .iter()
        .map(|t| replay_kb(t, kb, allow_incomplete, false).map(|o| o.stats))
        .collect::<Result<Vec<_>, _>>()?;
    perf(&stats)
}

/// Learns areas from `traces`, searches weights for them starting from
/// `initial`, and turns the best weights back into aggregated rules.
pub fn revise(
    initial: &KnowledgeBase,
    traces: &[ExplorationTrace],
    schedule: &SearchSchedule,
    allow_incomplete: bool,
) -> Result<Revision, RevisionError> {
    let first = traces.first().ok_or(RevisionError::NoProblems)?;
    let catalog = &first.catalog;
    for t in traces {
        if t.catalog != *catalog || t.domain_id != first.domain_id {
            return Err(RevisionError::CatalogMismatch(t.problem_id.clone()));
        }
        if !t.complete && !allow_incomplete {
            return Err(RevisionError::Incomplete(t.problem_id.clone()));
        }
    }
    initial.validate()?;
    let example_sets = build_example_sets(traces, catalog);
    let cuts = learn_cuts(&example_sets);
    let partition = Partition::build(catalog, initial, &cuts)?;
    let prepared = traces
        .iter()
        .map(|t| PreparedTrace::new(t, Some(&partition), allow_incomplete))
        .collect::<Result<Vec<_>, _>>()?;
    let initial_solution = Solution::embed(&partition, initial);
    let search = reactive_local_search(&initial_solution, &prepared, schedule)?;
    let revised = search.best.to_knowledge(&partition);
    let before = replay_perf(traces, initial, allow_incomplete)?;
    let after = replay_perf(traces, &revised, allow_incomplete)?;
    Ok(Revision {
        example_sets,
        cuts,
        partition,
        initial_solution,
        best_solution: search.best,
        log: search.log,
        evaluations: search.evaluations,
        revised,
        before,
        after,
    })
}
