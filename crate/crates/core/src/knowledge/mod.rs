//! Per-action production rule bases with integer weights.
//!
//! A [`KnowledgeBase`] holds one [`RuleBase`] per action. Each rule is a
//! conjunction of axis-aligned interval conditions over the measures of the
//! action's measure set, and yields an integer weight in `0..=weight_max`.
//! Points matched by no rule get weight 0 (the action is not proposed).

mod aggregate;
mod format;

use std::fmt;

use thiserror::Error;

use crate::engine::{ActionGuide, Catalog};

pub use aggregate::aggregate;
pub use format::{parse_kb, serialize_kb};

pub const DEFAULT_WEIGHT_MAX: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnowledgeError {
    #[error("measure vector has {found} values, measure set `{set}` has {expected}")]
    ArityMismatch {
        set: String,
        expected: usize,
        found: usize,
    },
    #[error("action `{action}`, rule {rule}: unknown measure `{measure}` for measure set `{set}`")]
    UnknownMeasure {
        action: String,
        rule: usize,
        measure: String,
        set: String,
    },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("action `{action}` declares measure set `{found}`, domain uses `{expected}`")]
    MeasureSetMismatch {
        action: String,
        expected: String,
        found: String,
    },
    #[error("no rule base for action `{0}`")]
    MissingAction(String),
    #[error("duplicate rule base for action `{0}`")]
    DuplicateAction(String),
    #[error("action `{action}`, rule {rule}: weight {weight} outside 0..={weight_max}")]
    WeightOutOfRange {
        action: String,
        rule: usize,
        weight: u32,
        weight_max: u32,
    },
    #[error("invalid rule base for action `{action}`: {violations:?}")]
    Invalid {
        action: String,
        violations: Vec<Violation>,
    },
    #[error("{0}")]
    Syntax(String),
}

/// A real interval. Infinite ends are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub const FULL: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };

    pub fn new(lower: f64, lower_closed: bool, upper: f64, upper_closed: bool) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: lower_closed && lower.is_finite(),
            upper_closed: upper_closed && upper.is_finite(),
        }
    }

    /// `x < value`
    pub fn below(value: f64) -> Self {
        Interval::new(f64::NEG_INFINITY, false, value, false)
    }

    /// `x <= value`
    pub fn at_most(value: f64) -> Self {
        Interval::new(f64::NEG_INFINITY, false, value, true)
    }

    /// `x >= value`
    pub fn at_least(value: f64) -> Self {
        Interval::new(value, true, f64::INFINITY, false)
    }

    /// `x > value`
    pub fn above(value: f64) -> Self {
        Interval::new(value, false, f64::INFINITY, false)
    }

    pub fn is_full(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    pub fn is_empty(&self) -> bool {
        if self.lower.is_nan() || self.upper.is_nan() {
            return true;
        }
        self.lower > self.upper
            || (self.lower == self.upper && !(self.lower_closed && self.upper_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above_lower = x > self.lower || (self.lower_closed && x == self.lower);
        let below_upper = x < self.upper || (self.upper_closed && x == self.upper);
        above_lower && below_upper
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lower, lower_closed) = if self.lower > other.lower {
            (self.lower, self.lower_closed)
        } else if other.lower > self.lower {
            (other.lower, other.lower_closed)
        } else {
            (self.lower, self.lower_closed && other.lower_closed)
        };
        let (upper, upper_closed) = if self.upper < other.upper {
            (self.upper, self.upper_closed)
        } else if other.upper < self.upper {
            (other.upper, other.upper_closed)
        } else {
            (self.upper, self.upper_closed && other.upper_closed)
        };
        Interval {
            lower,
            upper,
            lower_closed,
            upper_closed,
        }
    }

    /// A point inside a non-empty interval.
    pub fn sample_point(&self) -> f64 {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (false, false) => 0.0,
            (false, true) => {
                if self.upper_closed {
                    self.upper
                } else {
                    self.upper - 1.0 - self.upper.abs()
                }
            }
            (true, false) => {
                if self.lower_closed {
                    self.lower
                } else {
                    self.lower + 1.0 + self.lower.abs()
                }
            }
            (true, true) => {
                if self.lower == self.upper || self.lower_closed {
                    self.lower
                } else if self.upper_closed {
                    self.upper
                } else {
                    self.lower / 2.0 + self.upper / 2.0
                }
            }
        }
    }

    /// True when `self` ends exactly where `next` begins with no gap and no overlap.
    pub fn abuts(&self, next: &Interval) -> bool {
        self.upper.is_finite() && self.upper == next.lower && self.upper_closed != next.lower_closed
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = if self.lower_closed { '[' } else { '(' };
        let hi = if self.upper_closed { ']' } else { ')' };
        write!(f, "{lo}{}, {}{hi}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub measure: String,
    pub interval: Interval,
}

impl Condition {
    pub fn new(measure: impl Into<String>, interval: Interval) -> Self {
        Condition {
            measure: measure.into(),
            interval,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let iv = &self.interval;
        let m = &self.measure;
        let lower = iv.lower.is_finite().then(|| {
            if iv.lower_closed {
                format!("{m} >= {}", iv.lower)
            } else {
                format!("{m} > {}", iv.lower)
            }
        });
        let upper = iv.upper.is_finite().then(|| {
            if iv.upper_closed {
                format!("{m} <= {}", iv.upper)
            } else {
                format!("{m} < {}", iv.upper)
            }
        });
        match (lower, upper) {
            (Some(l), Some(u)) => write!(f, "({l}) and ({u})"),
            (Some(l), None) => write!(f, "({l})"),
            (None, Some(u)) => write!(f, "({u})"),
            (None, None) => write!(f, "({m} any)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub weight: u32,
}

impl Rule {
    pub fn new(conditions: Vec<Condition>, weight: u32) -> Self {
        Rule { conditions, weight }
    }

    /// Interval constraining `measure`, or the full line when unconstrained.
    pub fn interval_for(&self, measure: &str) -> Interval {
        self.conditions
            .iter()
            .filter(|c| c.measure == measure)
            .fold(Interval::FULL, |acc, c| acc.intersect(&c.interval))
    }

    fn measures(&self) -> impl Iterator<Item = &str> {
        self.conditions.iter().map(|c| c.measure.as_str())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditions.is_empty() {
            return write!(f, "always then weight = {}", self.weight);
        }
        write!(f, "if ")?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                write!(f, " and ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " then weight = {}", self.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Overlap {
        first: usize,
        second: usize,
        witness: Vec<(String, f64)>,
    },
    EmptyInterval {
        rule: usize,
        measure: String,
    },
    RepeatedMeasure {
        rule: usize,
        measure: String,
    },
    WeightOutOfRange {
        rule: usize,
        weight: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    pub action: String,
    pub measure_set: String,
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(
        action: impl Into<String>,
        measure_set: impl Into<String>,
        rules: Vec<Rule>,
    ) -> Self {
        RuleBase {
            action: action.into(),
            measure_set: measure_set.into(),
            rules,
        }
    }

    pub fn empty(action: impl Into<String>, measure_set: impl Into<String>) -> Self {
        RuleBase::new(action, measure_set, Vec::new())
    }

    /// Weight proposed at `values`, whose entries are named by `measure_names`.
    pub fn propose(&self, measure_names: &[String], values: &[f64]) -> Result<u32, KnowledgeError> {
        self.compile(measure_names)?.propose(values)
    }

    pub fn compile(&self, measure_names: &[String]) -> Result<CompiledRuleBase, KnowledgeError> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for (ri, rule) in self.rules.iter().enumerate() {
            let mut bounds = Vec::with_capacity(rule.conditions.len());
            for cond in &rule.conditions {
                let idx = measure_names
                    .iter()
                    .position(|m| *m == cond.measure)
                    .ok_or_else(|| KnowledgeError::UnknownMeasure {
                        action: self.action.clone(),
                        rule: ri,
                        measure: cond.measure.clone(),
                        set: self.measure_set.clone(),
                    })?;
                bounds.push((idx, cond.interval));
            }
            rules.push((bounds, rule.weight));
        }
        Ok(CompiledRuleBase {
            measure_set: self.measure_set.clone(),
            arity: measure_names.len(),
            rules,
        })
    }

    /// Structural problems and pairwise overlaps. Empty means the base is a
    /// set of disjoint, well-formed rules.
    pub fn validate(&self, weight_max: u32) -> Vec<Violation> {
        let mut out = Vec::new();
        for (ri, rule) in self.rules.iter().enumerate() {
            if rule.weight > weight_max {
                out.push(Violation::WeightOutOfRange {
                    rule: ri,
                    weight: rule.weight,
                });
            }
            for (ci, cond) in rule.conditions.iter().enumerate() {
                if rule.conditions[..ci]
                    .iter()
                    .any(|c| c.measure == cond.measure)
                {
                    out.push(Violation::RepeatedMeasure {
                        rule: ri,
                        measure: cond.measure.clone(),
                    });
                }
                if cond.interval.is_empty() {
                    out.push(Violation::EmptyInterval {
                        rule: ri,
                        measure: cond.measure.clone(),
                    });
                }
            }
        }
        for i in 0..self.rules.len() {
            for j in i + 1..self.rules.len() {
                if let Some(witness) = overlap_witness(&self.rules[i], &self.rules[j]) {
                    out.push(Violation::Overlap {
                        first: i,
                        second: j,
                        witness,
                    });
                }
            }
        }
        out
    }
}

/// A point matched by both rules, over the measures either one mentions.
fn overlap_witness(a: &Rule, b: &Rule) -> Option<Vec<(String, f64)>> {
    let mut measures: Vec<&str> = a.measures().chain(b.measures()).collect();
    measures.sort_unstable();
    measures.dedup();
    let mut witness = Vec::with_capacity(measures.len());
    for m in measures {
        let common = a.interval_for(m).intersect(&b.interval_for(m));
        if common.is_empty() {
            return None;
        }
        witness.push((m.to_string(), common.sample_point()));
    }
    Some(witness)
}

/// A rule base resolved against the measure names of its measure set.
#[derive(Debug, Clone)]
pub struct CompiledRuleBase {
    measure_set: String,
    arity: usize,
    rules: Vec<(Vec<(usize, Interval)>, u32)>,
}

impl CompiledRuleBase {
    /// Weight of the first matching rule, 0 if none matches.
    pub fn propose(&self, values: &[f64]) -> Result<u32, KnowledgeError> {
        if values.len() != self.arity {
            return Err(KnowledgeError::ArityMismatch {
                set: self.measure_set.clone(),
                expected: self.arity,
                found: values.len(),
            });
        }
        Ok(self
            .rules
            .iter()
            .find(|(bounds, _)| bounds.iter().all(|(i, iv)| iv.contains(values[*i])))
            .map_or(0, |(_, w)| *w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub weight_max: u32,
    pub rule_bases: Vec<RuleBase>,
}

impl KnowledgeBase {
    pub fn new(weight_max: u32, rule_bases: Vec<RuleBase>) -> Self {
        KnowledgeBase {
            weight_max,
            rule_bases,
        }
    }

    /// A base with no rules for any action of `catalog`.
    pub fn no_action(catalog: &Catalog, weight_max: u32) -> Self {
        let rule_bases = catalog
            .actions
            .iter()
            .map(|a| RuleBase::empty(&a.name, &catalog.measure_sets[a.measure_set].name))
            .collect();
        KnowledgeBase::new(weight_max, rule_bases)
    }

    pub fn rule_base(&self, action: &str) -> Option<&RuleBase> {
        self.rule_bases.iter().find(|rb| rb.action == action)
    }

    /// Validates every rule base; returns the first offending one.
    pub fn validate(&self) -> Result<(), KnowledgeError> {
        for rb in &self.rule_bases {
            let violations = rb.validate(self.weight_max);
            if !violations.is_empty() {
                return Err(KnowledgeError::Invalid {
                    action: rb.action.clone(),
                    violations,
                });
            }
        }
        Ok(())
    }

    /// Resolves this base against a domain catalog: one rule base per
    /// action, every measure known.
    pub fn bind(&self, catalog: &Catalog) -> Result<BoundKnowledge, KnowledgeError> {
        for (i, rb) in self.rule_bases.iter().enumerate() {
            if catalog.action_index(&rb.action).is_none() {
                return Err(KnowledgeError::UnknownAction(rb.action.clone()));
            }
            if self.rule_bases[..i].iter().any(|o| o.action == rb.action) {
                return Err(KnowledgeError::DuplicateAction(rb.action.clone()));
            }
        }
        let mut compiled = Vec::with_capacity(catalog.actions.len());
        for action in &catalog.actions {
            let set = &catalog.measure_sets[action.measure_set];
            let rb = self
                .rule_base(&action.name)
                .ok_or_else(|| KnowledgeError::MissingAction(action.name.clone()))?;
            if rb.measure_set != set.name {
                return Err(KnowledgeError::MeasureSetMismatch {
                    action: action.name.clone(),
                    expected: set.name.clone(),
                    found: rb.measure_set.clone(),
                });
            }
            compiled.push(rb.compile(&set.measures)?);
        }
        Ok(BoundKnowledge {
            rule_bases: compiled,
        })
    }
}

/// A knowledge base compiled against a catalog, indexed by action id.
#[derive(Debug, Clone)]
pub struct BoundKnowledge {
    rule_bases: Vec<CompiledRuleBase>,
}

impl ActionGuide for BoundKnowledge {
    fn weight(&self, action: usize, measures: &[f64]) -> Result<u32, KnowledgeError> {
        self.rule_bases[action].propose(measures)
    }
}

#[cfg(test)]
pub(crate) use tests::{names, three_rule_example};
