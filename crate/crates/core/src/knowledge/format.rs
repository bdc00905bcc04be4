//! JSON knowledge base files.
//!
//! ```json
//! { "weight_max": 5,
//!   "actions": [ { "action": "A", "measure_set": "S",
//!                  "rules": [ { "conditions": [ { "measure": "M1", "lt": 5.0 } ],
//!                               "weight": 2 } ] } ] }
//! ```
//!
//! A condition carries at most one lower key (`gte`/`gt`) and one upper key
//! (`lte`/`lt`); absent keys mean an infinite bound.

use serde::{Deserialize, Serialize};

use super::{Condition, Interval, KnowledgeBase, KnowledgeError, Rule, RuleBase};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KbFile {
    weight_max: u32,
    actions: Vec<ActionFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionFile {
    action: String,
    measure_set: String,
    rules: Vec<RuleFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    conditions: Vec<ConditionFile>,
    weight: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionFile {
    measure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gte: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lte: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lt: Option<f64>,
}

pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let file = KbFile {
        weight_max: kb.weight_max,
        actions: kb
            .rule_bases
            .iter()
            .map(|rb| ActionFile {
                action: rb.action.clone(),
                measure_set: rb.measure_set.clone(),
                rules: rb
                    .rules
                    .iter()
                    .map(|r| RuleFile {
                        conditions: r.conditions.iter().map(condition_to_file).collect(),
                        weight: r.weight,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("knowledge base serializes");
    text.push('\n');
    text
}

fn condition_to_file(c: &Condition) -> ConditionFile {
    let iv = &c.interval;
    let lower = iv.lower.is_finite().then_some(iv.lower);
    let upper = iv.upper.is_finite().then_some(iv.upper);
    ConditionFile {
        measure: c.measure.clone(),
        gte: lower.filter(|_| iv.lower_closed),
        gt: lower.filter(|_| !iv.lower_closed),
        lte: upper.filter(|_| iv.upper_closed),
        lt: upper.filter(|_| !iv.upper_closed),
    }
}

/// Parses a knowledge base file. Checks syntax, bound keys, and weight
/// ranges; names are checked later against a domain with
/// [`KnowledgeBase::bind`].
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, KnowledgeError> {
    let file: KbFile =
        serde_json::from_str(text).map_err(|e| KnowledgeError::Syntax(e.to_string()))?;
    if file.weight_max < 1 {
        return Err(KnowledgeError::Syntax(
            "weight_max must be at least 1".into(),
        ));
    }
    let mut rule_bases = Vec::with_capacity(file.actions.len());
    for (ai, af) in file.actions.into_iter().enumerate() {
        let mut rules = Vec::with_capacity(af.rules.len());
        for (ri, rf) in af.rules.into_iter().enumerate() {
            if rf.weight > file.weight_max {
                return Err(KnowledgeError::WeightOutOfRange {
                    action: af.action,
                    rule: ri,
                    weight: rf.weight,
                    weight_max: file.weight_max,
                });
            }
            let mut conditions = Vec::with_capacity(rf.conditions.len());
            for (ci, cf) in rf.conditions.into_iter().enumerate() {
                let at = || format!("action `{}` (#{ai}), rule {ri}, condition {ci}", af.action);
                conditions.push(
                    condition_from_file(cf)
                        .map_err(|m| KnowledgeError::Syntax(format!("{}: {m}", at())))?,
                );
            }
            rules.push(Rule::new(conditions, rf.weight));
        }
        rule_bases.push(RuleBase::new(af.action, af.measure_set, rules));
    }
    Ok(KnowledgeBase::new(file.weight_max, rule_bases))
}

fn condition_from_file(cf: ConditionFile) -> Result<Condition, String> {
    let (lower, lower_closed) = match (cf.gte, cf.gt) {
        (Some(_), Some(_)) => return Err("both `gte` and `gt` given".into()),
        (Some(v), None) => (v, true),
        (None, Some(v)) => (v, false),
        (None, None) => (f64::NEG_INFINITY, false),
    };
    let (upper, upper_closed) = match (cf.lte, cf.lt) {
        (Some(_), Some(_)) => return Err("both `lte` and `lt` given".into()),
        (Some(v), None) => (v, true),
        (None, Some(v)) => (v, false),
        (None, None) => (f64::INFINITY, false),
    };
    let interval = Interval::new(lower, lower_closed, upper, upper_closed);
    if interval.is_empty() {
        return Err(format!("empty interval {interval} on `{}`", cf.measure));
    }
    Ok(Condition::new(cf.measure, interval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::three_rule_example;
    use proptest::prelude::*;

    #[test]
    fn worked_example_round_trips() {
        let kb = KnowledgeBase::new(5, vec![three_rule_example()]);
        let text = serialize_kb(&kb);
        assert_eq!(parse_kb(&text).unwrap(), kb);
        assert!(text.contains("\"lt\": 5.0"));
        assert!(text.contains("\"gte\": 5.0"));
    }

    #[test]
    fn empty_rule_lists_parse() {
        let text = r#"{"weight_max": 5, "actions": [
            {"action": "A1", "measure_set": "S", "rules": []},
            {"action": "A2", "measure_set": "S", "rules": []}]}"#;
        let kb = parse_kb(text).unwrap();
        assert!(kb.rule_bases.iter().all(|rb| rb.rules.is_empty()));
        assert_eq!(kb.rule_bases.len(), 2);
    }

    #[test]
    fn weight_above_max_names_rule() {
        let text = r#"{"weight_max": 5, "actions": [
            {"action": "A1", "measure_set": "S", "rules": [
                {"conditions": [], "weight": 1},
                {"conditions": [{"measure": "M1", "gt": 0}], "weight": 7}]}]}"#;
        let err = parse_kb(text).unwrap_err();
        assert_eq!(
            err,
            KnowledgeError::WeightOutOfRange {
                action: "A1".into(),
                rule: 1,
                weight: 7,
                weight_max: 5
            }
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_kb("{\"weight_max\": 5,\n \"actions\": [}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn conflicting_bound_keys_rejected() {
        let text = r#"{"weight_max": 5, "actions": [
            {"action": "A1", "measure_set": "S", "rules": [
                {"conditions": [{"measure": "M1", "gt": 0, "gte": 1}], "weight": 1}]}]}"#;
        let msg = parse_kb(text).unwrap_err().to_string();
        assert!(msg.contains("rule 0") && msg.contains("gte"), "{msg}");
    }

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (
            proptest::option::of(-100i32..100),
            any::<bool>(),
            proptest::option::of(0i32..100),
            any::<bool>(),
        )
            .prop_map(|(lo, lc, width, uc)| {
                let lower = lo.map_or(f64::NEG_INFINITY, |v| v as f64 / 4.0);
                let upper = match (lo, width) {
                    (_, None) => f64::INFINITY,
                    (Some(l), Some(w)) => (l + w + 1) as f64 / 4.0,
                    (None, Some(w)) => w as f64 / 4.0,
                };
                Interval::new(lower, lc, upper, uc)
            })
    }

    fn arb_kb() -> impl Strategy<Value = KnowledgeBase> {
        let rule = (
            proptest::collection::vec(("[a-c]", arb_interval()), 0..3),
            0u32..=5,
        )
            .prop_map(|(cs, w)| {
                Rule::new(
                    cs.into_iter()
                        .map(|(m, iv)| Condition::new(m, iv))
                        .collect(),
                    w,
                )
            });
        let rb = ("[A-D]{1,3}", "[s-u]", proptest::collection::vec(rule, 0..4))
            .prop_map(|(a, s, rules)| RuleBase::new(a, s, rules));
        proptest::collection::vec(rb, 0..4).prop_map(|rbs| KnowledgeBase::new(5, rbs))
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(kb in arb_kb()) {
            prop_assert_eq!(parse_kb(&serialize_kb(&kb)).unwrap(), kb);
        }
    }
}
