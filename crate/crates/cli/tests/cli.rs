use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kbrevise::experiment::{load_pool, ExperimentConfig};
use kbrevise::knowledge::parse_kb;
use kbrevise::revision::PerfReport;
use tempfile::TempDir;

const SMALL: &str = r#"
domain = "maze"

[pool]
seed = 5
count = 24
size = 7

[split]
train = 10
test = 8
seed = 3

[limits]
max_states = 5000
max_depth = 200

[schedule]
max_iterations = 150
"#;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Run {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Run { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn kb(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kbrevise"));
        cmd.arg("--config")
            .arg(self.dir.path().join("run.toml"))
            .arg("--out")
            .arg(self.out())
            .args(args);
        cmd.output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.kb(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::load(&self.dir.path().join("run.toml")).unwrap();
        cfg.out = self.out();
        cfg
    }
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn genpool_is_deterministic_and_loads_back() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    let pool = read(&run.out().join("pools/pool.jsonl"));
    let split = read(&run.out().join("pools/split.json"));
    run.ok(&["genpool"]);
    assert_eq!(pool, read(&run.out().join("pools/pool.jsonl")));
    assert_eq!(split, read(&run.out().join("pools/split.json")));

    let (loaded, split) = load_pool(&run.config()).unwrap();
    assert_eq!(loaded.len(), 24);
    assert_eq!((split.train.len(), split.test.len()), (10, 8));
    assert!(split.train.iter().all(|id| !split.test.contains(id)));
}

#[test]
fn seed_flag_changes_the_pool() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    let a = read(&run.out().join("pools/pool.jsonl"));
    run.ok(&["--seed", "99", "genpool"]);
    assert_ne!(a, read(&run.out().join("pools/pool.jsonl")));
}

#[test]
fn zero_count_is_a_usage_error() {
    let run = Run::new(&SMALL.replace("count = 24", "count = 0"));
    let out = run.kb(&["genpool"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("pool.count"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let run = Run::new(&format!("{SMALL}\nbogus = 1\n"));
    assert!(!run.kb(&["genpool"]).status.success());
}

#[test]
fn explore_writes_one_trace_per_training_problem() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    run.ok(&["explore"]);
    let traces = run.out().join("traces");
    let first = snapshot(&traces);
    assert_eq!(first.len(), 11);
    assert!(first.iter().any(|(n, _)| n == "manifest.json"));
    run.ok(&["explore"]);
    assert_eq!(first, snapshot(&traces));
}

#[test]
fn explore_without_pool_names_the_missing_file() {
    let run = Run::new(SMALL);
    let out = run.kb(&["explore"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pool.jsonl"), "{err}");
}

#[test]
fn revise_noaction_improves_training_perf_and_writes_artifacts() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    run.ok(&["explore"]);
    run.ok(&["revise", "--kb", "noaction"]);

    let kb = parse_kb(&read(&run.out().join("kbs/noaction-revised.json"))).unwrap();
    kb.validate().unwrap();

    let report: serde_json::Value =
        serde_json::from_str(&read(&run.out().join("reports/revision-noaction.json"))).unwrap();
    let before = report["before"]["perf"].as_f64().unwrap();
    let after = report["after"]["perf"].as_f64().unwrap();
    assert!(after >= before, "{after} < {before}");
    assert!(!report["log"].as_array().unwrap().is_empty());
    for action in report["actions"].as_array().unwrap() {
        assert!(action["examples"].as_u64().unwrap() > 0);
        assert!(action["cuts"].is_array());
        assert!(!action["areas"].as_array().unwrap().is_empty());
    }
    let reports = run.out().join("reports");
    assert!(read(&reports.join("trajectory-noaction.csv")).starts_with("iteration,"));
    assert!(reports.join("examples-noaction-MOVE_FORWARD.csv").exists());
}

#[test]
fn revise_without_traces_fails() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    assert!(!run.kb(&["revise", "--kb", "expert"]).status.success());
}

#[test]
fn evaluate_noaction_expands_nothing_and_is_repeatable() {
    let run = Run::new(SMALL);
    run.ok(&["genpool"]);
    run.ok(&["evaluate", "--kb", "noaction", "--split", "test"]);
    let path = run.out().join("reports/perf-noaction-test.json");
    let first = read(&path);
    let report: PerfReport = serde_json::from_str(&first).unwrap();
    assert_eq!(report.mean_states, 1.0);
    assert_eq!(report.problems.len(), 8);
    run.ok(&["evaluate", "--kb", "noaction", "--split", "test"]);
    assert_eq!(first, read(&path));
}

#[test]
fn problems_starting_on_the_exit_score_perfect() {
    let run = Run::new(
        &SMALL
            .replace("train = 10", "train = 1")
            .replace("test = 8", "test = 1"),
    );
    let pools = run.out().join("pools");
    fs::create_dir_all(&pools).unwrap();
    let walls = "[[0,0],[1,0],[2,0],[0,1],[2,1],[0,2],[1,2],[2,2]]";
    let pool = format!(
        "{{\"kind\":\"maze\",\"seed\":0,\"count\":2}}\n\
         {{\"id\":\"a\",\"width\":3,\"height\":3,\"walls\":{walls},\"exit\":[1,1],\"start\":{{\"x\":1,\"y\":1,\"heading\":\"N\"}}}}\n\
         {{\"id\":\"b\",\"width\":3,\"height\":3,\"walls\":{walls},\"exit\":[1,1],\"start\":{{\"x\":1,\"y\":1,\"heading\":\"S\"}}}}\n"
    );
    fs::write(pools.join("pool.jsonl"), pool).unwrap();
    fs::write(
        pools.join("split.json"),
        r#"{"seed":0,"train":["a"],"test":["b"]}"#,
    )
    .unwrap();
    run.ok(&["evaluate", "--kb", "expert", "--split", "test"]);
    let report: PerfReport =
        serde_json::from_str(&read(&run.out().join("reports/perf-expert-test.json"))).unwrap();
    assert_eq!(report.perf, 1.0);
}

#[test]
fn report_lists_four_kbs_per_split() {
    let run = Run::new(SMALL);
    let stdout = run.ok(&["run"]);
    let csv = read(&run.out().join("reports/summary.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("kb,split,mean_sat,mean_states,perf"));
    let rows: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    for split in ["train", "test"] {
        let kbs: Vec<&str> = rows
            .iter()
            .filter(|r| r.1 == split)
            .map(|r| r.0.as_str())
            .collect();
        assert_eq!(
            kbs,
            ["expert", "expert-revised", "noaction", "noaction-revised"]
        );
    }
    assert!(stdout.contains("noaction-revised"));

    let table = run.ok(&["report", run.out().to_str().unwrap()]);
    assert_eq!(table.lines().count(), 9);
}

#[test]
fn report_on_missing_directory_fails() {
    let run = Run::new(SMALL);
    let out = run.kb(&["report", run.dir.path().join("nowhere").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn shipped_benchmark_config_matches_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/benchmark.toml");
    assert_eq!(
        ExperimentConfig::load(&path).unwrap(),
        ExperimentConfig::default()
    );
    let synthetic = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/synthetic.toml");
    ExperimentConfig::load(&synthetic).unwrap();
}
