//! Browser bindings: maze search playback, the Perf calculator and a small
//! revision run. Every export takes plain numbers or strings and returns JSON.

use kbrevise::domains::generate_maze_pool;
use kbrevise::domains::maze::{maze_expert_kb, maze_noaction_kb, MazeDomain, Pose};
use kbrevise::engine::{run, ProblemDomain, SearchLimits};
use kbrevise::knowledge::{parse_kb, serialize_kb, KnowledgeBase};
use kbrevise::revision::{perf_value, revise, SearchSchedule};
use kbrevise::trace::explore_sample;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn knowledge(kb: &str) -> Result<KnowledgeBase, String> {
    match kb.trim() {
        "expert" => Ok(maze_expert_kb()),
        "noaction" => Ok(maze_noaction_kb()),
        text => parse_kb(text).map_err(|e| e.to_string()),
    }
}

#[derive(Serialize)]
struct Step {
    pose: Pose,
    parent: Option<usize>,
    action: Option<String>,
    satisfaction: f64,
}

#[derive(Serialize)]
struct Playback {
    width: usize,
    height: usize,
    walls: Vec<(usize, usize)>,
    exit: (usize, usize),
    steps: Vec<Step>,
    best: usize,
    perf: f64,
}

pub fn playback_json(seed: u32, size: u32, kb: &str) -> Result<String, String> {
    let kb = knowledge(kb)?;
    let pool = generate_maze_pool(seed as u64, 1, size as usize).map_err(|e| e.to_string())?;
    let problem = pool.problems[0].1.clone();
    let domain = MazeDomain::new(problem.clone()).map_err(|e| e.to_string())?;
    let out = run(&domain, problem.start, &kb, SearchLimits::default(), false)
        .map_err(|e| e.to_string())?;
    let catalog = domain.catalog();
    let mut steps: Vec<Step> = Vec::with_capacity(out.visits.len());
    for v in &out.visits {
        let pose = match (v.parent, v.action) {
            (Some(p), Some(a)) => domain.apply(&steps[p].pose, a).map_err(|e| e.to_string())?,
            _ => problem.start,
        };
        steps.push(Step {
            pose,
            parent: v.parent,
            action: v.action.map(|a| catalog.actions[a].name.clone()),
            satisfaction: v.satisfaction,
        });
    }
    let playback = Playback {
        width: problem.width,
        height: problem.height,
        walls: problem.walls.clone(),
        exit: problem.exit,
        steps,
        best: out.best,
        perf: perf_value(out.best_satisfaction, out.states_evaluated as f64),
    };
    Ok(serde_json::to_string(&playback).expect("playback serializes"))
}

#[derive(Serialize)]
struct RevisionSummary {
    before: f64,
    after: f64,
    rules: Vec<String>,
    kb: String,
}

pub fn revise_json(
    seed: u32,
    problems: u32,
    size: u32,
    iterations: u32,
    kb: &str,
) -> Result<String, String> {
    let initial = knowledge(kb)?;
    let pool = generate_maze_pool(seed as u64, problems as usize, size as usize)
        .map_err(|e| e.to_string())?;
    let traces = explore_sample(&pool, SearchLimits::default())
        .map_err(|e| e.to_string())?
        .traces;
    let schedule = SearchSchedule {
        max_iterations: iterations as usize,
        seed: seed as u64,
        ..SearchSchedule::default()
    };
    let r = revise(&initial, &traces, &schedule, false).map_err(|e| e.to_string())?;
    let rules = r
        .revised
        .rule_bases
        .iter()
        .flat_map(|rb| {
            rb.rules
                .iter()
                .map(move |rule| format!("{}: {rule}", rb.action))
        })
        .collect();
    let summary = RevisionSummary {
        before: r.before.perf,
        after: r.after.perf,
        rules,
        kb: serialize_kb(&r.revised),
    };
    Ok(serde_json::to_string(&summary).expect("summary serializes"))
}

/// Runs `kb` (`expert`, `noaction` or KB JSON) on the maze generated from
/// `seed` and returns every evaluated state in order.
#[wasm_bindgen]
pub fn maze_playback(seed: u32, size: u32, kb: &str) -> Result<String, JsValue> {
    playback_json(seed, size, kb).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn perf(mean_satisfaction: f64, mean_states: f64) -> f64 {
    perf_value(mean_satisfaction, mean_states)
}

/// Explores `problems` mazes and revises `kb` from them.
#[wasm_bindgen]
pub fn revise_maze(
    seed: u32,
    problems: u32,
    size: u32,
    iterations: u32,
    kb: &str,
) -> Result<String, JsValue> {
    revise_json(seed, problems, size, iterations, kb).map_err(|e| JsValue::from_str(&e))
}
