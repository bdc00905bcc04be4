use serde::{Deserialize, Serialize};

use crate::engine::{ActionId, Catalog};
use crate::knowledge::{Condition, Interval, KnowledgeBase, KnowledgeError, Rule, RuleBase};

/// Which part of the initial rule base an area refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AreaOrigin {
    Rule(usize),
    /// The region no initial rule covers.
    Default,
}

/// An axis-aligned box of one action's measure space. `bounds` is aligned
/// with the measure names of the action's measure set.
#[derive(Debug, Clone, PartialEq)]
pub struct Area {
    pub bounds: Vec<Interval>,
    pub origin: AreaOrigin,
}

impl Area {
    pub fn contains(&self, values: &[f64]) -> bool {
        self.bounds.len() == values.len()
            && self.bounds.iter().zip(values).all(|(b, &v)| b.contains(v))
    }

    /// A point strictly inside the area.
    pub fn sample_point(&self) -> Vec<f64> {
        self.bounds.iter().map(Interval::sample_point).collect()
    }

    pub fn to_rule(&self, measure_names: &[String], weight: u32) -> Rule {
        let conditions = self
            .bounds
            .iter()
            .zip(measure_names)
            .filter(|(b, _)| !b.is_full())
            .map(|(b, m)| Condition::new(m.clone(), *b))
            .collect();
        Rule::new(conditions, weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionAreas {
    pub action: ActionId,
    pub action_name: String,
    pub measure_set: String,
    pub measure_names: Vec<String>,
    pub cuts: Vec<Vec<f64>>,
    pub areas: Vec<Area>,
}

impl ActionAreas {
    pub fn locate(&self, values: &[f64]) -> Option<usize> {
        self.areas.iter().position(|a| a.contains(values))
    }
}

/// Areas for every action of a catalog, indexed by action id.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub actions: Vec<ActionAreas>,
}

impl Partition {
    /// Builds areas for each action from the initial knowledge base and the
    /// learned cuts (`cuts[action][measure]`).
    pub fn build(
        catalog: &Catalog,
        kb: &KnowledgeBase,
        cuts: &[Vec<Vec<f64>>],
    ) -> Result<Partition, KnowledgeError> {
        kb.bind(catalog)?;
        let mut actions = Vec::with_capacity(catalog.actions.len());
        for (i, spec) in catalog.actions.iter().enumerate() {
            let set = &catalog.measure_sets[spec.measure_set];
            let rb = kb
                .rule_base(&spec.name)
                .ok_or_else(|| KnowledgeError::MissingAction(spec.name.clone()))?;
            let action_cuts = cuts
                .get(i)
                .cloned()
                .unwrap_or_else(|| vec![Vec::new(); set.measures.len()]);
            let areas = build_areas(rb, &set.measures, &action_cuts, kb.weight_max)?;
            actions.push(ActionAreas {
                action: i,
                action_name: spec.name.clone(),
                measure_set: set.name.clone(),
                measure_names: set.measures.clone(),
                cuts: action_cuts,
                areas,
            });
        }
        Ok(Partition { actions })
    }

    pub fn area_of(&self, action: ActionId, values: &[f64]) -> Option<usize> {
        self.actions[action].locate(values)
    }

    pub fn area_count(&self) -> usize {
        self.actions.iter().map(|a| a.areas.len()).sum()
    }

    /// Initial weight of every area: the weight of the rule it refines, 0
    /// for the uncovered region.
    pub fn embed(&self, kb: &KnowledgeBase) -> Vec<Vec<u32>> {
        self.actions
            .iter()
            .map(|aa| {
                let rules = kb
                    .rule_base(&aa.action_name)
                    .map(|rb| rb.rules.as_slice())
                    .unwrap_or(&[]);
                aa.areas
                    .iter()
                    .map(|a| match a.origin {
                        AreaOrigin::Rule(r) => rules.get(r).map_or(0, |r| r.weight),
                        AreaOrigin::Default => 0,
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Split {
    /// `x < v | x >= v`
    Before(f64),
    /// `x <= v | x > v`
    After(f64),
}

impl Split {
    fn key(self) -> (f64, u8) {
        match self {
            Split::Before(v) => (v, 0),
            Split::After(v) => (v, 1),
        }
    }
}

fn cells(mut splits: Vec<Split>) -> Vec<Interval> {
    splits.sort_by(|a, b| {
        let (ka, kb) = (a.key(), b.key());
        ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
    });
    splits.dedup();
    let mut out = Vec::with_capacity(splits.len() + 1);
    let (mut lower, mut lower_closed) = (f64::NEG_INFINITY, false);
    for s in splits {
        let (v, upper_closed, next_closed) = match s {
            Split::Before(v) => (v, false, true),
            Split::After(v) => (v, true, false),
        };
        out.push(Interval::new(lower, lower_closed, v, upper_closed));
        lower = v;
        lower_closed = next_closed;
    }
    out.push(Interval::new(lower, lower_closed, f64::INFINITY, false));
    out
}

fn interval_splits(iv: &Interval) -> Vec<Split> {
    let mut out = Vec::new();
    if iv.lower.is_finite() {
        out.push(if iv.lower_closed {
            Split::Before(iv.lower)
        } else {
            Split::After(iv.lower)
        });
    }
    if iv.upper.is_finite() {
        out.push(if iv.upper_closed {
            Split::After(iv.upper)
        } else {
            Split::Before(iv.upper)
        });
    }
    out
}

fn product(lists: &[Vec<Interval>]) -> Vec<Vec<Interval>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |iv| {
                    let mut p = prefix.clone();
                    p.push(*iv);
                    p
                })
            })
            .collect();
    }
    out
}

/// Partitions one action's measure space. Every rule box is cut along the
/// learned cut points; the region no rule covers is split into the cells of
/// the grid formed by rule bounds and cuts. Rule areas come first, in rule
/// order, then uncovered cells.
pub fn build_areas(
    rule_base: &RuleBase,
    measure_names: &[String],
    cuts: &[Vec<f64>],
    weight_max: u32,
) -> Result<Vec<Area>, KnowledgeError> {
    let violations = rule_base.validate(weight_max);
    if !violations.is_empty() {
        return Err(KnowledgeError::Invalid {
            action: rule_base.action.clone(),
            violations,
        });
    }
    rule_base.compile(measure_names)?;
    let dims = measure_names.len();
    let cut_at = |m: usize| cuts.get(m).map(Vec::as_slice).unwrap_or(&[]);
    let learned: Vec<Vec<Interval>> = (0..dims)
        .map(|m| cells(cut_at(m).iter().map(|&c| Split::Before(c)).collect()))
        .collect();
    let rule_boxes: Vec<Vec<Interval>> = rule_base
        .rules
        .iter()
        .map(|r| measure_names.iter().map(|m| r.interval_for(m)).collect())
        .collect();

    let mut areas = Vec::new();
    for (ri, bx) in rule_boxes.iter().enumerate() {
        let per_dim: Vec<Vec<Interval>> = (0..dims)
            .map(|m| {
                learned[m]
                    .iter()
                    .map(|c| c.intersect(&bx[m]))
                    .filter(|c| !c.is_empty())
                    .collect()
            })
            .collect();
        areas.extend(product(&per_dim).into_iter().map(|bounds| Area {
            bounds,
            origin: AreaOrigin::Rule(ri),
        }));
    }

    let full: Vec<Vec<Interval>> = (0..dims)
        .map(|m| {
            let mut splits: Vec<Split> = cut_at(m).iter().map(|&c| Split::Before(c)).collect();
            for bx in &rule_boxes {
                splits.extend(interval_splits(&bx[m]));
            }
            cells(splits)
        })
        .collect();
    let uncovered: Vec<Vec<Interval>> = product(&full)
        .into_iter()
        .filter(|cell| {
            let p: Vec<f64> = cell.iter().map(Interval::sample_point).collect();
            !rule_boxes
                .iter()
                .any(|bx| bx.iter().zip(&p).all(|(iv, &x)| iv.contains(x)))
        })
        .collect();

    areas.extend(uncovered.into_iter().map(|bounds| Area {
        bounds,
        origin: AreaOrigin::Default,
    }));
    Ok(areas)
}
