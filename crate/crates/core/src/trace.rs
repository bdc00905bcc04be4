//! Exploration stage: minimal-pruning runs over a problem sample, and the
//! line-delimited trace files they are persisted in.
//!
//! A trace file holds one JSON object per line. Line 1 is a header
//! (`"version": 1`, problem and domain ids, catalog, limits, completeness,
//! node count); every following line is a [`TraceNode`] in evaluation order.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    run_with, ActionId, Catalog, DomainError, EngineError, ProblemDomain, SearchLimits, SearchMode,
};

pub const TRACE_VERSION: u32 = 1;
pub const TRACE_EXTENSION: &str = "trace.jsonl";
const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("unsupported trace version {found} (expected {TRACE_VERSION})")]
    Version { found: u32 },
    #[error("corrupt record at byte offset {offset}: {message}")]
    Corrupt { offset: u64, message: String },
    #[error("truncated trace at byte offset {offset}: expected {expected} nodes, found {found}")]
    Truncated {
        offset: u64,
        expected: usize,
        found: usize,
    },
    #[error("duplicate problem id `{0}` in sample")]
    DuplicateProblem(String),
}

impl TraceError {
    fn io(path: &Path, source: io::Error) -> Self {
        TraceError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One generated state of a minimal-pruning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub action: Option<ActionId>,
    pub satisfaction: f64,
    pub valid: bool,
    /// Set when the state had already been expanded; points at that node.
    pub duplicate_of: Option<usize>,
    /// One vector per measure set of the catalog.
    pub measures: Vec<Vec<f64>>,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace {
    pub problem_id: String,
    pub domain_id: String,
    pub catalog: Catalog,
    pub limits: SearchLimits,
    pub perfect_threshold: f64,
    pub complete: bool,
    pub best: usize,
    pub nodes: Vec<TraceNode>,
}

impl ExplorationTrace {
    /// Best non-duplicate node, earliest on ties.
    pub fn best_node(nodes: &[TraceNode]) -> usize {
        let mut best = 0;
        for n in nodes {
            if n.duplicate_of.is_none() && n.satisfaction > nodes[best].satisfaction {
                best = n.id;
            }
        }
        best
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.nodes.len()];
        for n in &self.nodes[1..] {
            if let Some(p) = n.parent {
                children[p].push(n.id);
            }
        }
        children
    }

    /// For each node, the child generated by each action (if any).
    pub fn child_table(&self) -> Vec<Vec<Option<usize>>> {
        let width = self.catalog.actions.len();
        let mut table: Vec<Vec<Option<usize>>> = vec![Vec::new(); self.nodes.len()];
        for n in &self.nodes[1..] {
            if let (Some(p), Some(a)) = (n.parent, n.action) {
                let row = &mut table[p];
                if row.is_empty() {
                    row.resize(width, None);
                }
                row[a] = Some(n.id);
            }
        }
        table
    }
}

/// A problem payload that can be turned into a searchable domain.
pub trait Problem {
    type Domain: ProblemDomain;

    fn build(&self) -> Result<(Self::Domain, <Self::Domain as ProblemDomain>::State), DomainError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSample<P> {
    pub seed: u64,
    pub problems: Vec<(String, P)>,
}

impl<P: Clone> ProblemSample<P> {
    /// Seeded uniform choice of `count` problems from `pool`.
    pub fn select(pool: &[(String, P)], count: usize, seed: u64) -> Self {
        let (sample, _) = Self::split(pool, count, 0, seed);
        sample
    }

    /// Seeded disjoint selection of a training and a test sample.
    pub fn split(pool: &[(String, P)], train: usize, test: usize, seed: u64) -> (Self, Self) {
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let take = |range: std::ops::Range<usize>| ProblemSample {
            seed,
            problems: order[range.start.min(pool.len())..range.end.min(pool.len())]
                .iter()
                .map(|&i| pool[i].clone())
                .collect(),
        };
        (take(0..train), take(train..train + test))
    }
}

impl<P> ProblemSample<P> {
    pub fn check_unique(&self) -> Result<(), TraceError> {
        let mut ids: Vec<&str> = self.problems.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        match ids.windows(2).find(|w| w[0] == w[1]) {
            Some(w) => Err(TraceError::DuplicateProblem(w[0].to_string())),
            None => Ok(()),
        }
    }
}

/// Minimal-pruning run of one problem.
pub fn explore_problem<D: ProblemDomain>(
    problem_id: &str,
    domain: &D,
    initial: D::State,
    limits: SearchLimits,
) -> Result<ExplorationTrace, EngineError> {
    let outcome = run_with(domain, initial, SearchMode::MinimalPruning, limits)?;
    let nodes = outcome.trace.unwrap_or_default();
    Ok(ExplorationTrace {
        problem_id: problem_id.to_string(),
        domain_id: domain.domain_id().to_string(),
        catalog: domain.catalog().clone(),
        limits,
        perfect_threshold: domain.perfect_threshold(),
        complete: !outcome.truncated,
        best: ExplorationTrace::best_node(&nodes),
        nodes,
    })
}

#[derive(Debug, Default)]
pub struct Exploration {
    pub traces: Vec<ExplorationTrace>,
    /// Problems whose domain failed, with the diagnostic.
    pub failures: Vec<(String, String)>,
}

/// Explores every problem of `sample`. A failing problem is recorded and
/// the others proceed.
pub fn explore_sample<P: Problem>(
    sample: &ProblemSample<P>,
    limits: SearchLimits,
) -> Result<Exploration, TraceError> {
    sample.check_unique()?;
    let mut out = Exploration::default();
    for (id, problem) in &sample.problems {
        let result = problem
            .build()
            .map_err(|e| e.to_string())
            .and_then(|(domain, initial)| {
                explore_problem(id, &domain, initial, limits).map_err(|e| e.to_string())
            });
        match result {
            Ok(trace) => out.traces.push(trace),
            Err(message) => out.failures.push((id.clone(), message)),
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    problem_id: String,
    domain_id: String,
    catalog: Catalog,
    limits: SearchLimits,
    perfect_threshold: f64,
    complete: bool,
    best: usize,
    node_count: usize,
}

pub fn write_trace<W: Write>(trace: &ExplorationTrace, mut w: W) -> io::Result<()> {
    let header = Header {
        version: TRACE_VERSION,
        problem_id: trace.problem_id.clone(),
        domain_id: trace.domain_id.clone(),
        catalog: trace.catalog.clone(),
        limits: trace.limits,
        perfect_threshold: trace.perfect_threshold,
        complete: trace.complete,
        best: trace.best,
        node_count: trace.nodes.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for node in &trace.nodes {
        serde_json::to_writer(&mut w, node)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_trace<R: BufRead>(mut r: R) -> Result<ExplorationTrace, TraceError> {
    let mut offset = 0u64;
    let mut line = String::new();
    let mut next_line = |line: &mut String, offset: &mut u64| -> Result<Option<u64>, TraceError> {
        line.clear();
        let start = *offset;
        let n = r.read_line(line).map_err(|e| TraceError::Corrupt {
            offset: start,
            message: e.to_string(),
        })?;
        *offset += n as u64;
        Ok((n > 0).then_some(start))
    };

    let start = next_line(&mut line, &mut offset)?.ok_or(TraceError::Corrupt {
        offset: 0,
        message: "empty file".into(),
    })?;
    let header: Header = serde_json::from_str(&line).map_err(|e| TraceError::Corrupt {
        offset: start,
        message: format!("header: {e}"),
    })?;
    if header.version != TRACE_VERSION {
        return Err(TraceError::Version {
            found: header.version,
        });
    }

    let mut nodes = Vec::with_capacity(header.node_count);
    while let Some(start) = next_line(&mut line, &mut offset)? {
        let node: TraceNode = serde_json::from_str(&line).map_err(|e| TraceError::Corrupt {
            offset: start,
            message: e.to_string(),
        })?;
        let well_formed = node.id == nodes.len()
            && node.parent.is_none_or(|p| p < node.id)
            && (node.id == 0) == node.parent.is_none()
            && node.measures.len() == header.catalog.measure_sets.len()
            && node.action.is_none_or(|a| a < header.catalog.actions.len());
        if !well_formed {
            return Err(TraceError::Corrupt {
                offset: start,
                message: format!("node record {} is inconsistent", nodes.len()),
            });
        }
        nodes.push(node);
    }
    if nodes.len() != header.node_count || nodes.is_empty() {
        return Err(TraceError::Truncated {
            offset,
            expected: header.node_count,
            found: nodes.len(),
        });
    }
    Ok(ExplorationTrace {
        problem_id: header.problem_id,
        domain_id: header.domain_id,
        catalog: header.catalog,
        limits: header.limits,
        perfect_threshold: header.perfect_threshold,
        complete: header.complete,
        best: header.best,
        nodes,
    })
}

pub fn trace_file_name(problem_id: &str) -> String {
    format!("{problem_id}.{TRACE_EXTENSION}")
}

pub fn save_trace(trace: &ExplorationTrace, path: &Path) -> Result<(), TraceError> {
    let file = fs::File::create(path).map_err(|e| TraceError::io(path, e))?;
    write_trace(trace, BufWriter::new(file)).map_err(|e| TraceError::io(path, e))
}

pub fn load_trace(path: &Path) -> Result<ExplorationTrace, TraceError> {
    let file = fs::File::open(path).map_err(|e| TraceError::io(path, e))?;
    read_trace(BufReader::new(file))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<String>,
    pub failures: Vec<(String, String)>,
}

/// Writes one file per trace into `dir`, plus a manifest listing them.
pub fn save_traces(
    traces: &[ExplorationTrace],
    failures: &[(String, String)],
    dir: &Path,
) -> Result<(), TraceError> {
    fs::create_dir_all(dir).map_err(|e| TraceError::io(dir, e))?;
    let mut files = Vec::with_capacity(traces.len());
    for t in traces {
        let name = trace_file_name(&t.problem_id);
        save_trace(t, &dir.join(&name))?;
        files.push(name);
    }
    let manifest = Manifest {
        files,
        failures: failures.to_vec(),
    };
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| TraceError::io(&path, e))
}

pub fn load_traces(dir: &Path) -> Result<Vec<ExplorationTrace>, TraceError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| TraceError::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| TraceError::Corrupt {
        offset: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    manifest
        .files
        .iter()
        .map(|f| load_trace(&dir.join(f)))
        .collect()
}

#[cfg(test)]
pub(crate) use tests::tiny_catalog;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ActionSpec, MeasureSetSpec};

    pub(crate) fn tiny_catalog() -> Catalog {
        Catalog {
            actions: vec![
                ActionSpec {
                    name: "A1".into(),
                    measure_set: 0,
                },
                ActionSpec {
                    name: "A2".into(),
                    measure_set: 0,
                },
            ],
            measure_sets: vec![MeasureSetSpec {
                name: "S".into(),
                measures: vec!["m".into()],
            }],
        }
    }

    fn node(id: usize, parent: Option<usize>, action: Option<usize>, sat: f64) -> TraceNode {
        TraceNode {
            id,
            parent,
            action,
            satisfaction: sat,
            valid: true,
            duplicate_of: None,
            measures: vec![vec![sat * 0.1]],
            depth: parent.map_or(0, |_| 1),
        }
    }

    fn sample_trace(n: usize) -> ExplorationTrace {
        let mut nodes = vec![node(0, None, None, 1.0)];
        for i in 1..n {
            let mut nd = node(
                i,
                Some((i - 1) / 2),
                Some((i - 1) % 2),
                1.0 + (i % 9) as f64,
            );
            nd.depth = nodes[(i - 1) / 2].depth + 1;
            nodes.push(nd);
        }
        ExplorationTrace {
            problem_id: "p".into(),
            domain_id: "d".into(),
            catalog: tiny_catalog(),
            limits: SearchLimits::default(),
            perfect_threshold: 10.0 - 1e-9,
            complete: true,
            best: ExplorationTrace::best_node(&nodes),
            nodes,
        }
    }

    fn round_trip(t: &ExplorationTrace) -> ExplorationTrace {
        let mut buf = Vec::new();
        write_trace(t, &mut buf).unwrap();
        read_trace(&buf[..]).unwrap()
    }

    #[test]
    fn one_node_round_trip() {
        let t = sample_trace(1);
        assert_eq!(round_trip(&t), t);
    }

    #[test]
    fn large_round_trip() {
        let t = sample_trace(500);
        assert_eq!(round_trip(&t), t);
    }

    #[test]
    fn truncated_file_names_offset() {
        let t = sample_trace(20);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        // Cut in the middle of a record.
        let cut = buf.len() - 30;
        let err = read_trace(&buf[..cut]).unwrap_err();
        let last_line_start = buf[..cut].iter().rposition(|&b| b == b'\n').unwrap() as u64 + 1;
        match err {
            TraceError::Corrupt { offset, .. } => assert_eq!(offset, last_line_start),
            other => panic!("unexpected {other}"),
        }
        // Cut on a record boundary.
        let err = read_trace(&buf[..last_line_start as usize]).unwrap_err();
        match err {
            TraceError::Truncated {
                offset,
                expected,
                found,
            } => {
                assert_eq!((offset, expected, found), (last_line_start, 20, 19));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let t = sample_trace(2);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(
            read_trace(text.as_bytes()),
            Err(TraceError::Version { found: 2 })
        ));
    }

    #[test]
    fn best_skips_duplicates_and_prefers_earliest() {
        let mut nodes = vec![
            node(0, None, None, 3.0),
            node(1, Some(0), Some(0), 7.0),
            node(2, Some(0), Some(1), 7.0),
            node(3, Some(1), Some(0), 9.0),
        ];
        nodes[3].duplicate_of = Some(1);
        assert_eq!(ExplorationTrace::best_node(&nodes), 1);
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let pool: Vec<(String, u32)> = (0..30).map(|i| (format!("p{i}"), i)).collect();
        let (a, b) = ProblemSample::split(&pool, 10, 15, 42);
        let (a2, b2) = ProblemSample::split(&pool, 10, 15, 42);
        assert_eq!((a.clone(), b.clone()), (a2, b2));
        assert_eq!((a.problems.len(), b.problems.len()), (10, 15));
        for (id, _) in &a.problems {
            assert!(!b.problems.iter().any(|(o, _)| o == id));
        }
        let (c, _) = ProblemSample::split(&pool, 10, 15, 43);
        assert_ne!(a, c);
    }
}
