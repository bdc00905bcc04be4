//! Built-in problem domains and their pool generators.
//!
//! Pool files are line-delimited JSON: a header line
//! `{"kind": "maze"|"synthetic", "seed": .., "count": ..}` followed by one
//! problem record per line. Maze records carry the full grid; synthetic
//! records carry only the seed and tree shape.

pub mod maze;
pub mod synthetic;

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::ProblemSample;
use maze::{generate_maze, MazeProblem};
use synthetic::{SyntheticParams, SyntheticProblem};

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("pool line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pool count must be at least 1")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pool {
    Maze(ProblemSample<MazeProblem>),
    Synthetic(ProblemSample<SyntheticProblem>),
}

impl Pool {
    pub fn len(&self) -> usize {
        match self {
            Pool::Maze(s) => s.problems.len(),
            Pool::Synthetic(s) => s.problems.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        match self {
            Pool::Maze(s) => s.problems.iter().map(|(id, _)| id.clone()).collect(),
            Pool::Synthetic(s) => s.problems.iter().map(|(id, _)| id.clone()).collect(),
        }
    }
}

pub fn generate_maze_pool(
    seed: u64,
    count: usize,
    size: usize,
) -> Result<ProblemSample<MazeProblem>, PoolError> {
    if count == 0 {
        return Err(PoolError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problems = (0..count)
        .map(|i| (format!("maze-{i:04}"), generate_maze(&mut rng, size)))
        .collect();
    Ok(ProblemSample { seed, problems })
}

pub fn generate_synthetic_pool(
    seed: u64,
    count: usize,
    branching: usize,
    depth: usize,
) -> Result<ProblemSample<SyntheticProblem>, PoolError> {
    if count == 0 {
        return Err(PoolError::Empty);
    }
    let problems = (0..count)
        .map(|i| {
            let params = SyntheticParams {
                seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
                branching,
                depth,
            };
            (format!("tree-{i:04}"), SyntheticProblem::generate(params))
        })
        .collect();
    Ok(ProblemSample { seed, problems })
}

#[derive(Serialize, Deserialize)]
struct PoolHeader {
    kind: String,
    seed: u64,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct MazeRecord {
    id: String,
    #[serde(flatten)]
    problem: MazeProblem,
}

#[derive(Serialize, Deserialize)]
struct SyntheticRecord {
    id: String,
    #[serde(flatten)]
    params: SyntheticParams,
}

pub fn write_pool(pool: &Pool) -> String {
    fn line<T: Serialize>(out: &mut String, v: &T) {
        let json = serde_json::to_string(v).expect("pool record serializes");
        let _ = writeln!(out, "{json}");
    }
    let mut out = String::new();
    match pool {
        Pool::Maze(s) => {
            line(
                &mut out,
                &PoolHeader {
                    kind: "maze".into(),
                    seed: s.seed,
                    count: s.problems.len(),
                },
            );
            for (id, p) in &s.problems {
                line(
                    &mut out,
                    &MazeRecord {
                        id: id.clone(),
                        problem: p.clone(),
                    },
                );
            }
        }
        Pool::Synthetic(s) => {
            line(
                &mut out,
                &PoolHeader {
                    kind: "synthetic".into(),
                    seed: s.seed,
                    count: s.problems.len(),
                },
            );
            for (id, p) in &s.problems {
                line(
                    &mut out,
                    &SyntheticRecord {
                        id: id.clone(),
                        params: p.params,
                    },
                );
            }
        }
    }
    out
}

pub fn read_pool(text: &str) -> Result<Pool, PoolError> {
    fn parse<T: for<'de> Deserialize<'de>>(line: usize, s: &str) -> Result<T, PoolError> {
        serde_json::from_str(s).map_err(|e| PoolError::Parse {
            line,
            message: e.to_string(),
        })
    }
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(PoolError::Parse {
        line: 1,
        message: "empty pool file".into(),
    })?;
    let header: PoolHeader = parse(1, first)?;
    let pool = match header.kind.as_str() {
        "maze" => {
            let problems = lines
                .map(|(i, l)| parse::<MazeRecord>(i + 1, l).map(|r| (r.id, r.problem)))
                .collect::<Result<_, _>>()?;
            Pool::Maze(ProblemSample {
                seed: header.seed,
                problems,
            })
        }
        "synthetic" => {
            let problems = lines
                .map(|(i, l)| {
                    parse::<SyntheticRecord>(i + 1, l)
                        .map(|r| (r.id, SyntheticProblem::generate(r.params)))
                })
                .collect::<Result<_, _>>()?;
            Pool::Synthetic(ProblemSample {
                seed: header.seed,
                problems,
            })
        }
        other => {
            return Err(PoolError::Parse {
                line: 1,
                message: format!("unknown pool kind `{other}`"),
            })
        }
    };
    if pool.len() != header.count {
        return Err(PoolError::Parse {
            line: text.lines().count(),
            message: format!(
                "header announces {} problems, found {}",
                header.count,
                pool.len()
            ),
        });
    }
    Ok(pool)
}
