//! Config-driven experiment runs: pool generation, exploration of the
//! training split, revision, live evaluation and summary reports.
//!
//! Output layout under `out`:
//!
//! ```text
//! pools/pool.jsonl, pools/split.json
//! traces/<problem>.trace.jsonl, traces/manifest.json
//! kbs/<name>.json, kbs/<name>-revised.json
//! reports/revision-<name>.json, reports/trajectory-<name>.csv,
//! reports/examples-<name>-<action>.csv, reports/perf-<kb>-<split>.json,
//! reports/summary.csv
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::maze::{maze_expert_kb, maze_noaction_kb};
use crate::domains::synthetic::synthetic_catalog;
use crate::domains::{
    generate_maze_pool, generate_synthetic_pool, read_pool, write_pool, Pool, PoolError,
};
use crate::engine::{run, EngineError, SearchLimits};
use crate::knowledge::{parse_kb, serialize_kb, KnowledgeBase, KnowledgeError, DEFAULT_WEIGHT_MAX};
use crate::learning::AreaOrigin;
use crate::revision::{
    perf, revise, PerfReport, ReplayStats, Revision, RevisionError, SearchSchedule,
};
use crate::trace::{explore_sample, load_traces, save_traces, Problem, ProblemSample, TraceError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Revision(#[from] RevisionError),
    #[error("problem `{problem}`: {source}")]
    Engine {
        problem: String,
        source: EngineError,
    },
    #[error("no problems could be explored")]
    NothingExplored,
}

type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Maze,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolConfig {
    pub seed: u64,
    pub count: usize,
    /// Maze side length.
    pub size: usize,
    /// Synthetic tree shape.
    pub branching: usize,
    pub depth: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            seed: 2024,
            count: 150,
            size: 9,
            branching: 3,
            depth: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: 50,
            test: 100,
            seed: 17,
        }
    }
}

/// TOML experiment description. Every field has a default; the defaults
/// are the standard maze benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub pool: PoolConfig,
    pub split: SplitConfig,
    pub limits: SearchLimits,
    pub schedule: SearchSchedule,
    /// Built-in names (`expert`, `noaction`) or KB file paths.
    pub initial_kbs: Vec<String>,
    pub out: PathBuf,
    /// Revise from traces that hit a search limit.
    pub allow_incomplete: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: DomainKind::Maze,
            pool: PoolConfig::default(),
            split: SplitConfig::default(),
            limits: SearchLimits::default(),
            schedule: SearchSchedule::default(),
            initial_kbs: vec!["expert".into(), "noaction".into()],
            out: PathBuf::from("out"),
            allow_incomplete: false,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| file_error(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            ExperimentError::Config(m) => {
                ExperimentError::Config(format!("{}: {m}", path.display()))
            }
            other => other,
        })
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.pool.count == 0 {
            return bad("pool.count must be at least 1");
        }
        if self.split.train == 0 || self.split.test == 0 {
            return bad("split sizes must be at least 1");
        }
        if self.split.train + self.split.test > self.pool.count {
            return bad("split.train + split.test exceeds pool.count");
        }
        if self.domain == DomainKind::Synthetic && self.pool.branching == 0 {
            return bad("pool.branching must be at least 1");
        }
        self.limits
            .check()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.schedule.check()?;
        Ok(())
    }

    /// Sets every seed (pool, split, search) to `seed`.
    pub fn reseed(&mut self, seed: u64) {
        self.pool.seed = seed;
        self.split.seed = seed;
        self.schedule.seed = seed;
    }

    pub fn pools_dir(&self) -> PathBuf {
        self.out.join("pools")
    }

    pub fn traces_dir(&self) -> PathBuf {
        self.out.join("traces")
    }

    pub fn kbs_dir(&self) -> PathBuf {
        self.out.join("kbs")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out.join("reports")
    }
}

fn file_error(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| file_error(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| file_error(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| file_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFile {
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SplitFile {
    pub fn ids(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

fn subset<P: Clone>(sample: &ProblemSample<P>, ids: &[String]) -> Result<ProblemSample<P>> {
    let problems = ids
        .iter()
        .map(|id| {
            sample
                .problems
                .iter()
                .find(|(pid, _)| pid == id)
                .cloned()
                .ok_or_else(|| {
                    ExperimentError::Config(format!("problem `{id}` is not in the pool"))
                })
        })
        .collect::<Result<_>>()?;
    Ok(ProblemSample {
        seed: sample.seed,
        problems,
    })
}

/// Generates the pool and the train/test split.
pub fn cmd_genpool(cfg: &ExperimentConfig) -> Result<Pool> {
    cfg.check()?;
    let pool = match cfg.domain {
        DomainKind::Maze => Pool::Maze(generate_maze_pool(
            cfg.pool.seed,
            cfg.pool.count,
            cfg.pool.size,
        )?),
        DomainKind::Synthetic => Pool::Synthetic(generate_synthetic_pool(
            cfg.pool.seed,
            cfg.pool.count,
            cfg.pool.branching,
            cfg.pool.depth,
        )?),
    };
    let (train, test) = {
        let ids: Vec<(String, ())> = pool.ids().into_iter().map(|id| (id, ())).collect();
        let (a, b) = ProblemSample::split(&ids, cfg.split.train, cfg.split.test, cfg.split.seed);
        let names = |s: ProblemSample<()>| s.problems.into_iter().map(|(id, _)| id).collect();
        (names(a), names(b))
    };
    let dir = cfg.pools_dir();
    write_file(&dir.join("pool.jsonl"), &write_pool(&pool))?;
    write_file(
        &dir.join("split.json"),
        &to_json(&SplitFile {
            seed: cfg.split.seed,
            train,
            test,
        }),
    )?;
    Ok(pool)
}

pub fn load_pool(cfg: &ExperimentConfig) -> Result<(Pool, SplitFile)> {
    let dir = cfg.pools_dir();
    let pool = read_pool(&read_file(&dir.join("pool.jsonl"))?)
        .map_err(|e| file_error(&dir.join("pool.jsonl"), e))?;
    let split_path = dir.join("split.json");
    let split: SplitFile =
        serde_json::from_str(&read_file(&split_path)?).map_err(|e| file_error(&split_path, e))?;
    Ok((pool, split))
}

/// Minimal-pruning exploration of the training split. Returns the number
/// of traces written.
pub fn cmd_explore(cfg: &ExperimentConfig) -> Result<usize> {
    let (pool, split) = load_pool(cfg)?;
    let exploration = match &pool {
        Pool::Maze(s) => explore_sample(&subset(s, &split.train)?, cfg.limits)?,
        Pool::Synthetic(s) => explore_sample(&subset(s, &split.train)?, cfg.limits)?,
    };
    if exploration.traces.is_empty() {
        return Err(ExperimentError::NothingExplored);
    }
    save_traces(
        &exploration.traces,
        &exploration.failures,
        &cfg.traces_dir(),
    )?;
    Ok(exploration.traces.len())
}

/// A built-in base for the config's domain, or a KB file.
pub fn resolve_kb(cfg: &ExperimentConfig, spec: &str) -> Result<(String, KnowledgeBase)> {
    let builtin = match (cfg.domain, spec) {
        (DomainKind::Maze, "expert") => Some(maze_expert_kb()),
        (DomainKind::Maze, "noaction") => Some(maze_noaction_kb()),
        (DomainKind::Synthetic, "noaction") => Some(KnowledgeBase::no_action(
            &synthetic_catalog(cfg.pool.branching),
            DEFAULT_WEIGHT_MAX,
        )),
        _ => None,
    };
    if let Some(kb) = builtin {
        return Ok((spec.to_string(), kb));
    }
    let path = Path::new(spec);
    let kb = parse_kb(&read_file(path)?).map_err(|e| file_error(path, e))?;
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.strip_suffix(".json").unwrap_or(n).to_string())
        .unwrap_or_else(|| "kb".to_string());
    Ok((name, kb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AreaReport {
    origin: String,
    region: String,
    weight: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ActionReport {
    action: String,
    examples: usize,
    successes: usize,
    cuts: Vec<(String, Vec<f64>)>,
    areas: Vec<AreaReport>,
    initial_rules: Vec<String>,
    revised_rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RevisionReport {
    kb: String,
    before: PerfReport,
    after: PerfReport,
    evaluations: usize,
    actions: Vec<ActionReport>,
    log: Vec<crate::revision::SearchLogEntry>,
}

fn rule_lines(kb: &KnowledgeBase, action: &str) -> Vec<String> {
    kb.rule_base(action)
        .map(|rb| rb.rules.iter().map(ToString::to_string).collect())
        .unwrap_or_default()
}

fn revision_report(name: &str, initial: &KnowledgeBase, r: &Revision) -> RevisionReport {
    let actions = r
        .partition
        .actions
        .iter()
        .enumerate()
        .map(|(a, aa)| {
            let set = &r.example_sets[a];
            ActionReport {
                action: aa.action_name.clone(),
                examples: set.examples.len(),
                successes: set
                    .labels()
                    .iter()
                    .filter(|l| **l == crate::learning::Label::Success)
                    .count(),
                cuts: aa
                    .measure_names
                    .iter()
                    .cloned()
                    .zip(r.cuts[a].iter().cloned())
                    .collect(),
                areas: aa
                    .areas
                    .iter()
                    .zip(&r.best_solution.weights[a])
                    .map(|(area, &weight)| {
                        let rule = area.to_rule(&aa.measure_names, weight);
                        let region = rule
                            .conditions
                            .iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>();
                        AreaReport {
                            origin: match area.origin {
                                AreaOrigin::Rule(i) => format!("rule {i}"),
                                AreaOrigin::Default => "default".into(),
                            },
                            region: if region.is_empty() {
                                "always".into()
                            } else {
                                region.join(" and ")
                            },
                            weight,
                        }
                    })
                    .collect(),
                initial_rules: rule_lines(initial, &aa.action_name),
                revised_rules: rule_lines(&r.revised, &aa.action_name),
            }
        })
        .collect();
    RevisionReport {
        kb: name.to_string(),
        before: r.before.clone(),
        after: r.after.clone(),
        evaluations: r.evaluations,
        actions,
        log: r.log.clone(),
    }
}

fn trajectory_csv(r: &Revision) -> String {
    let mut out = String::from("iteration,action,area,delta,objective,best,tenure,restart\n");
    for e in &r.log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.iteration, e.action, e.area, e.delta, e.objective, e.best, e.tenure, e.restart
        );
    }
    out
}

/// Revises `kb_spec` from the stored traces; writes the initial and revised
/// bases and the revision reports. Returns the revised base's file path.
pub fn cmd_revise(cfg: &ExperimentConfig, kb_spec: &str) -> Result<(PathBuf, Revision)> {
    let (name, initial) = resolve_kb(cfg, kb_spec)?;
    let traces = load_traces(&cfg.traces_dir())?;
    let revision = revise(&initial, &traces, &cfg.schedule, cfg.allow_incomplete)?;
    let kbs = cfg.kbs_dir();
    write_file(&kbs.join(format!("{name}.json")), &serialize_kb(&initial))?;
    let revised_path = kbs.join(format!("{name}-revised.json"));
    write_file(&revised_path, &serialize_kb(&revision.revised))?;
    let reports = cfg.reports_dir();
    write_file(
        &reports.join(format!("revision-{name}.json")),
        &to_json(&revision_report(&name, &initial, &revision)),
    )?;
    write_file(
        &reports.join(format!("trajectory-{name}.csv")),
        &trajectory_csv(&revision),
    )?;
    for set in &revision.example_sets {
        write_file(
            &reports.join(format!("examples-{name}-{}.csv", set.action_name)),
            &set.to_csv(),
        )?;
    }
    Ok((revised_path, revision))
}

fn live_stats<P: Problem + Clone>(
    sample: &ProblemSample<P>,
    kb: &KnowledgeBase,
    limits: SearchLimits,
) -> Result<Vec<ReplayStats>> {
    sample
        .problems
        .iter()
        .map(|(id, p)| {
            let engine = |source| ExperimentError::Engine {
                problem: id.clone(),
                source,
            };
            let (domain, initial) = p.build().map_err(|e| {
                engine(EngineError::Domain {
                    state: 0,
                    source: e,
                })
            })?;
            let out = run(&domain, initial, kb, limits, false).map_err(engine)?;
            Ok(ReplayStats {
                problem: id.clone(),
                best_satisfaction: out.best_satisfaction,
                states: out.states_evaluated,
            })
        })
        .collect()
}

/// Live normal-mode runs of `kb` on one split.
pub fn evaluate_kb(cfg: &ExperimentConfig, kb: &KnowledgeBase, split: Split) -> Result<PerfReport> {
    let (pool, split_file) = load_pool(cfg)?;
    let ids = split_file.ids(split);
    let stats = match &pool {
        Pool::Maze(s) => live_stats(&subset(s, ids)?, kb, cfg.limits)?,
        Pool::Synthetic(s) => live_stats(&subset(s, ids)?, kb, cfg.limits)?,
    };
    Ok(perf(&stats)?)
}

/// Evaluates and writes `reports/perf-<name>-<split>.json`.
pub fn cmd_evaluate(
    cfg: &ExperimentConfig,
    kb_spec: &str,
    split: Split,
) -> Result<(PathBuf, PerfReport)> {
    let (name, kb) = resolve_kb(cfg, kb_spec)?;
    let report = evaluate_kb(cfg, &kb, split)?;
    let path = cfg
        .reports_dir()
        .join(format!("perf-{name}-{}.json", split.as_str()));
    write_file(&path, &to_json(&report))?;
    Ok((path, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub kb: String,
    pub split: String,
    pub mean_satisfaction: f64,
    pub mean_states: f64,
    pub perf: f64,
}

/// Collects every `perf-<kb>-<split>.json` report into `summary.csv` and a
/// printable table.
pub fn cmd_report(out: &Path) -> Result<(Vec<SummaryRow>, String)> {
    let reports = out.join("reports");
    let entries = fs::read_dir(&reports).map_err(|e| file_error(&reports, e))?;
    let mut rows = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| file_error(&reports, e))?.path();
        let Some(stem) = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("perf-"))
            .and_then(|n| n.strip_suffix(".json"))
        else {
            continue;
        };
        let Some((kb, split)) = stem.rsplit_once('-') else {
            continue;
        };
        let report: PerfReport =
            serde_json::from_str(&read_file(&path)?).map_err(|e| file_error(&path, e))?;
        rows.push(SummaryRow {
            kb: kb.to_string(),
            split: split.to_string(),
            mean_satisfaction: report.mean_satisfaction,
            mean_states: report.mean_states,
            perf: report.perf,
        });
    }
    if rows.is_empty() {
        return Err(file_error(&reports, "no perf-*.json reports"));
    }
    rows.sort_by(|a, b| (&a.split, &a.kb).cmp(&(&b.split, &b.kb)));
    let mut csv = String::from("kb,split,mean_sat,mean_states,perf\n");
    let mut table = format!(
        "{:<24} {:<6} {:>9} {:>12} {:>8}\n",
        "kb", "split", "mean_sat", "mean_states", "perf"
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.kb, r.split, r.mean_satisfaction, r.mean_states, r.perf
        );
        let _ = writeln!(
            table,
            "{:<24} {:<6} {:>9.3} {:>12.2} {:>8.4}",
            r.kb, r.split, r.mean_satisfaction, r.mean_states, r.perf
        );
    }
    write_file(&reports.join("summary.csv"), &csv)?;
    Ok((rows, table))
}

/// Every stage in order: pool, exploration, revision of each initial base,
/// live evaluation of initial and revised bases on both splits, summary.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cmd_genpool(cfg)?;
    cmd_explore(cfg)?;
    for spec in &cfg.initial_kbs {
        let (name, _) = resolve_kb(cfg, spec)?;
        let (revised, _) = cmd_revise(cfg, spec)?;
        let initial = cfg.kbs_dir().join(format!("{name}.json"));
        for split in [Split::Train, Split::Test] {
            cmd_evaluate(cfg, &initial.to_string_lossy(), split)?;
            cmd_evaluate(cfg, &revised.to_string_lossy(), split)?;
        }
    }
    Ok(cmd_report(&cfg.out)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_benchmark() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!((cfg.split.train, cfg.split.test), (50, 100));
        assert_eq!(cfg.initial_kbs, ["expert", "noaction"]);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig {
            domain: DomainKind::Synthetic,
            schedule: SearchSchedule {
                max_iterations: 7,
                ..SearchSchedule::default()
            },
            ..ExperimentConfig::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn bad_configs_are_rejected() {
        for text in [
            "[split]\ntrain = 0",
            "[split]\ntrain = 100\ntest = 100",
            "[pool]\ncount = 0",
            "[limits]\nmax_states = 0",
            "[schedule]\ntenure_increase = 0.5",
            "domain = \"chess\"",
            "extra = true",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn reseed_sets_every_seed() {
        let mut cfg = ExperimentConfig::default();
        cfg.reseed(42);
        assert_eq!(
            (cfg.pool.seed, cfg.split.seed, cfg.schedule.seed),
            (42, 42, 42)
        );
    }

    #[test]
    fn builtin_and_file_kbs_resolve() {
        let cfg = ExperimentConfig::default();
        assert_eq!(resolve_kb(&cfg, "expert").unwrap().1, maze_expert_kb());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mine.json");
        fs::write(&path, serialize_kb(&maze_noaction_kb())).unwrap();
        let (name, kb) = resolve_kb(&cfg, path.to_str().unwrap()).unwrap();
        assert_eq!((name.as_str(), kb), ("mine", maze_noaction_kb()));
        assert!(resolve_kb(&cfg, "missing.json").is_err());
    }

    #[test]
    fn synthetic_pipeline_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            domain: DomainKind::Synthetic,
            pool: PoolConfig {
                seed: 3,
                count: 12,
                size: 0,
                branching: 2,
                depth: 4,
            },
            split: SplitConfig {
                train: 6,
                test: 6,
                seed: 1,
            },
            schedule: SearchSchedule {
                max_iterations: 100,
                ..SearchSchedule::default()
            },
            initial_kbs: vec!["noaction".into()],
            out: dir.path().to_path_buf(),
            ..ExperimentConfig::default()
        };
        let rows = run_pipeline(&cfg).unwrap();
        let kbs: Vec<_> = rows
            .iter()
            .map(|r| (r.split.as_str(), r.kb.as_str()))
            .collect();
        assert_eq!(
            kbs,
            [
                ("test", "noaction"),
                ("test", "noaction-revised"),
                ("train", "noaction"),
                ("train", "noaction-revised")
            ]
        );
        assert!(rows[3].perf >= rows[2].perf);
        assert!(resolve_kb(&cfg, "expert").is_err());
    }
}
