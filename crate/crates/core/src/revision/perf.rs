use serde::{Deserialize, Serialize};

use super::replay::ReplayStats;
use super::RevisionError;

/// `(3 * mean_satisfaction / 10 + 1 / sqrt(mean_states)) / 4`
pub fn perf_value(mean_satisfaction: f64, mean_states: f64) -> f64 {
    0.25 * (3.0 * mean_satisfaction / 10.0 + 1.0 / mean_states.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub problems: Vec<ReplayStats>,
    pub mean_satisfaction: f64,
    pub mean_states: f64,
    pub perf: f64,
}

/// Means are summed in input order, so equal inputs give bit-equal reports.
pub fn perf(stats: &[ReplayStats]) -> Result<PerfReport, RevisionError> {
    if stats.is_empty() {
        return Err(RevisionError::NoProblems);
    }
    let n = stats.len() as f64;
    let mean_satisfaction = stats.iter().map(|s| s.best_satisfaction).sum::<f64>() / n;
    let mean_states = stats.iter().map(|s| s.states as f64).sum::<f64>() / n;
    Ok(PerfReport {
        problems: stats.to_vec(),
        mean_satisfaction,
        mean_states,
        perf: perf_value(mean_satisfaction, mean_states),
    })
}
