//! A robot looking for the exit of a grid maze.
//!
//! Actions are `MOVE_FORWARD`, `TURN_LEFT` and `TURN_RIGHT`. Satisfaction is
//! 10 on the exit and `max(1, 10 - d)` elsewhere, where `d` is the
//! breadth-first cell distance to the exit. All three actions share the
//! measure set `robot = [dist, blocked_ahead, align]`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    ActionId, ActionSpec, Catalog, DomainError, MeasureSetId, MeasureSetSpec, ProblemDomain,
    Satisfaction,
};
use crate::knowledge::{Condition, Interval, KnowledgeBase, Rule, RuleBase, DEFAULT_WEIGHT_MAX};
use crate::trace::Problem;

pub const MOVE_FORWARD: ActionId = 0;
pub const TURN_LEFT: ActionId = 1;
pub const TURN_RIGHT: ActionId = 2;

/// Starting poses are drawn at most this many cells from the exit, so the
/// satisfaction scale stays informative.
pub const MAX_START_DISTANCE: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn right(self) -> Heading {
        self.left().opposite()
    }

    pub fn opposite(self) -> Heading {
        self.left().left()
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::N => (0, -1),
            Heading::E => (1, 0),
            Heading::S => (0, 1),
            Heading::W => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub x: usize,
    pub y: usize,
    pub heading: Heading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeProblem {
    pub width: usize,
    pub height: usize,
    /// Wall cells, as `[x, y]`.
    pub walls: Vec<(usize, usize)>,
    pub exit: (usize, usize),
    pub start: Pose,
}

impl Problem for MazeProblem {
    type Domain = MazeDomain;

    fn build(&self) -> Result<(MazeDomain, Pose), DomainError> {
        Ok((MazeDomain::new(self.clone())?, self.start))
    }
}

pub fn maze_catalog() -> Catalog {
    let action = |name: &str| ActionSpec {
        name: name.into(),
        measure_set: 0,
    };
    Catalog {
        actions: vec![
            action("MOVE_FORWARD"),
            action("TURN_LEFT"),
            action("TURN_RIGHT"),
        ],
        measure_sets: vec![MeasureSetSpec {
            name: "robot".into(),
            measures: vec!["dist".into(), "blocked_ahead".into(), "align".into()],
        }],
    }
}

#[derive(Debug, Clone)]
pub struct MazeDomain {
    problem: MazeProblem,
    wall: Vec<bool>,
    dist: Vec<Option<u32>>,
    catalog: Catalog,
}

impl MazeDomain {
    pub fn new(problem: MazeProblem) -> Result<Self, DomainError> {
        let (w, h) = (problem.width, problem.height);
        if w == 0 || h == 0 {
            return Err(DomainError("maze has no cells".into()));
        }
        let mut wall = vec![false; w * h];
        for &(x, y) in &problem.walls {
            if x >= w || y >= h {
                return Err(DomainError(format!("wall ({x}, {y}) outside {w}x{h} grid")));
            }
            wall[y * w + x] = true;
        }
        let start = (problem.start.x, problem.start.y);
        for (what, (x, y)) in [("exit", problem.exit), ("start", start)] {
            if x >= w || y >= h || wall[y * w + x] {
                return Err(DomainError(format!("{what} cell ({x}, {y}) is not open")));
            }
        }
        let dist = distances_from(w, h, &wall, problem.exit);
        if dist[start.1 * w + start.0].is_none() {
            return Err(DomainError(format!(
                "exit {:?} unreachable from start {start:?}",
                problem.exit
            )));
        }
        Ok(MazeDomain {
            problem,
            wall,
            dist,
            catalog: maze_catalog(),
        })
    }

    pub fn problem(&self) -> &MazeProblem {
        &self.problem
    }

    pub fn is_open(&self, x: i64, y: i64) -> bool {
        let (w, h) = (self.problem.width as i64, self.problem.height as i64);
        x >= 0 && y >= 0 && x < w && y < h && !self.wall[(y * w + x) as usize]
    }

    /// Breadth-first distance to the exit, `None` if unreachable.
    pub fn distance(&self, x: usize, y: usize) -> Option<u32> {
        self.dist[y * self.problem.width + x]
    }

    fn ahead(&self, pose: &Pose) -> (i64, i64) {
        let (dx, dy) = pose.heading.delta();
        (pose.x as i64 + dx, pose.y as i64 + dy)
    }

    fn align(&self, pose: &Pose, d: u32) -> f64 {
        if d == 0 {
            return 0.0;
        }
        let decreasing: Vec<Heading> = Heading::ALL
            .into_iter()
            .filter(|h| {
                let (dx, dy) = h.delta();
                let (nx, ny) = (pose.x as i64 + dx, pose.y as i64 + dy);
                self.is_open(nx, ny) && self.distance(nx as usize, ny as usize) == Some(d - 1)
            })
            .collect();
        if decreasing.contains(&pose.heading) {
            0.0
        } else if decreasing.contains(&pose.heading.opposite()) {
            2.0
        } else {
            1.0
        }
    }
}

fn distances_from(w: usize, h: usize, wall: &[bool], from: (usize, usize)) -> Vec<Option<u32>> {
    let mut dist = vec![None; w * h];
    let mut queue = VecDeque::from([from]);
    dist[from.1 * w + from.0] = Some(0);
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y * w + x].unwrap_or(0);
        for heading in Heading::ALL {
            let (dx, dy) = heading.delta();
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let i = ny as usize * w + nx as usize;
            if !wall[i] && dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    dist
}

impl ProblemDomain for MazeDomain {
    type State = Pose;
    type Key = Pose;

    fn domain_id(&self) -> &str {
        "maze"
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn satisfaction(&self, pose: &Pose) -> Result<Satisfaction, DomainError> {
        let d = self
            .distance(pose.x, pose.y)
            .ok_or_else(|| DomainError(format!("pose {pose:?} cannot reach the exit")))?;
        let value = if d == 0 {
            10.0
        } else {
            (10.0 - d as f64).max(1.0)
        };
        Satisfaction::new(value)
    }

    fn measures(&self, pose: &Pose, set: MeasureSetId) -> Result<Vec<f64>, DomainError> {
        if set != 0 {
            return Err(DomainError(format!("unknown measure set {set}")));
        }
        let d = self
            .distance(pose.x, pose.y)
            .ok_or_else(|| DomainError(format!("pose {pose:?} cannot reach the exit")))?;
        let (ax, ay) = self.ahead(pose);
        let blocked = if self.is_open(ax, ay) { 0.0 } else { 1.0 };
        Ok(vec![d as f64, blocked, self.align(pose, d)])
    }

    fn apply(&self, pose: &Pose, action: ActionId) -> Result<Pose, DomainError> {
        Ok(match action {
            MOVE_FORWARD => {
                let (ax, ay) = self.ahead(pose);
                if self.is_open(ax, ay) {
                    Pose {
                        x: ax as usize,
                        y: ay as usize,
                        heading: pose.heading,
                    }
                } else {
                    *pose
                }
            }
            TURN_LEFT => Pose {
                heading: pose.heading.left(),
                ..*pose
            },
            TURN_RIGHT => Pose {
                heading: pose.heading.right(),
                ..*pose
            },
            other => return Err(DomainError(format!("unknown action {other}"))),
        })
    }

    fn state_key(&self, pose: &Pose) -> Pose {
        *pose
    }

    fn is_valid(&self, _: &Pose, _: Satisfaction, _: Option<(&Pose, Satisfaction)>) -> bool {
        true
    }
}

fn rule(conds: &[(&str, Interval)], weight: u32) -> Rule {
    Rule::new(
        conds
            .iter()
            .map(|(m, iv)| Condition::new(*m, *iv))
            .collect(),
        weight,
    )
}

/// A hand-written base: go forward when facing a way towards the exit, turn
/// when misaligned.
pub fn maze_expert_kb() -> KnowledgeBase {
    let clear = ("blocked_ahead", Interval::below(0.5));
    let aligned = ("align", Interval::below(0.5));
    let sideways = ("align", Interval::new(0.5, true, 1.5, false));
    let misaligned = ("align", Interval::at_least(0.5));
    KnowledgeBase::new(
        DEFAULT_WEIGHT_MAX,
        vec![
            RuleBase::new(
                "MOVE_FORWARD",
                "robot",
                vec![rule(&[clear, aligned], 5), rule(&[clear, sideways], 1)],
            ),
            RuleBase::new("TURN_LEFT", "robot", vec![rule(&[misaligned], 3)]),
            RuleBase::new("TURN_RIGHT", "robot", vec![rule(&[misaligned], 3)]),
        ],
    )
}

pub fn maze_noaction_kb() -> KnowledgeBase {
    KnowledgeBase::no_action(&maze_catalog(), DEFAULT_WEIGHT_MAX)
}

/// A perfect maze carved by randomized depth-first search on a
/// `size x size` grid (`size` rounded down to odd, at least 5), with a random
/// exit and a start pose at most [`MAX_START_DISTANCE`] cells away.
pub fn generate_maze(rng: &mut ChaCha8Rng, size: usize) -> MazeProblem {
    let rooms = (size.max(5) - 1) / 2;
    let n = 2 * rooms + 1;
    let mut wall = vec![true; n * n];
    let room = |i: usize, j: usize| (2 * i + 1, 2 * j + 1);
    let mut visited = vec![false; rooms * rooms];
    let first = (rng.gen_range(0..rooms), rng.gen_range(0..rooms));
    let mut stack = vec![first];
    visited[first.1 * rooms + first.0] = true;
    let (x, y) = room(first.0, first.1);
    wall[y * n + x] = false;
    while let Some(&(i, j)) = stack.last() {
        let mut next: Vec<(usize, usize)> = Heading::ALL
            .iter()
            .filter_map(|h| {
                let (dx, dy) = h.delta();
                let (ni, nj) = (i as i64 + dx, j as i64 + dy);
                let inside = ni >= 0 && nj >= 0 && ni < rooms as i64 && nj < rooms as i64;
                (inside && !visited[nj as usize * rooms + ni as usize])
                    .then_some((ni as usize, nj as usize))
            })
            .collect();
        if next.is_empty() {
            stack.pop();
            continue;
        }
        next.shuffle(rng);
        let (ni, nj) = next[0];
        visited[nj * rooms + ni] = true;
        let (ax, ay) = room(i, j);
        let (bx, by) = room(ni, nj);
        wall[((ay + by) / 2) * n + (ax + bx) / 2] = false;
        wall[by * n + bx] = false;
        stack.push((ni, nj));
    }

    let open: Vec<(usize, usize)> = (0..n * n)
        .filter(|&i| !wall[i])
        .map(|i| (i % n, i / n))
        .collect();
    let exit = open[rng.gen_range(0..open.len())];
    let dist = distances_from(n, n, &wall, exit);
    let candidates: Vec<(usize, usize)> = open
        .iter()
        .copied()
        .filter(|&(x, y)| dist[y * n + x].is_some_and(|d| (1..=MAX_START_DISTANCE).contains(&d)))
        .collect();
    let (sx, sy) = candidates[rng.gen_range(0..candidates.len())];
    let heading = Heading::ALL[rng.gen_range(0..4)];
    MazeProblem {
        width: n,
        height: n,
        walls: (0..n * n)
            .filter(|&i| wall[i])
            .map(|i| (i % n, i / n))
            .collect(),
        exit,
        start: Pose {
            x: sx,
            y: sy,
            heading,
        },
    }
}
