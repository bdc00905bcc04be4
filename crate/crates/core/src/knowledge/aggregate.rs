use super::{Condition, Interval, Rule, RuleBase};

/// Merges same-weight rules whose regions differ along a single measure and
/// whose union along that measure is one interval. Measures are tried in name
/// order and merging repeats until no pair qualifies. The proposed weight is
/// unchanged at every point.
pub fn aggregate(rule_base: &RuleBase) -> RuleBase {
    let mut rules = rule_base.rules.clone();
    let mut measures: Vec<String> = rules
        .iter()
        .flat_map(|r| r.conditions.iter().map(|c| c.measure.clone()))
        .collect();
    measures.sort();
    measures.dedup();

    'fixpoint: loop {
        for m in &measures {
            for i in 0..rules.len() {
                for j in i + 1..rules.len() {
                    if let Some(merged) = try_merge(&rules[i], &rules[j], m, &measures) {
                        rules[i] = merged;
                        rules.remove(j);
                        continue 'fixpoint;
                    }
                }
            }
        }
        break;
    }

    RuleBase {
        action: rule_base.action.clone(),
        measure_set: rule_base.measure_set.clone(),
        rules,
    }
}

fn try_merge(a: &Rule, b: &Rule, along: &str, measures: &[String]) -> Option<Rule> {
    if a.weight != b.weight {
        return None;
    }
    let same_elsewhere = measures
        .iter()
        .filter(|m| m.as_str() != along)
        .all(|m| a.interval_for(m) == b.interval_for(m));
    if !same_elsewhere {
        return None;
    }
    let (ia, ib) = (a.interval_for(along), b.interval_for(along));
    let union = if ia.abuts(&ib) {
        Interval::new(ia.lower, ia.lower_closed, ib.upper, ib.upper_closed)
    } else if ib.abuts(&ia) {
        Interval::new(ib.lower, ib.lower_closed, ia.upper, ia.upper_closed)
    } else {
        return None;
    };

    let mut conditions: Vec<Condition> = Vec::with_capacity(a.conditions.len());
    for c in &a.conditions {
        if c.measure == along {
            if !union.is_full() {
                conditions.push(Condition::new(along, union));
            }
        } else {
            conditions.push(c.clone());
        }
    }
    Some(Rule::new(conditions, a.weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::names;
    use proptest::prelude::*;

    fn rule(conds: Vec<(&str, Interval)>, w: u32) -> Rule {
        Rule::new(
            conds
                .into_iter()
                .map(|(m, iv)| Condition::new(m, iv))
                .collect(),
            w,
        )
    }

    #[test]
    fn last_two_rules_are_aggregated() {
        let rb = RuleBase::new(
            "A",
            "S",
            vec![
                rule(vec![("M1", Interval::below(5.0))], 1),
                rule(
                    vec![
                        ("M1", Interval::at_least(5.0)),
                        ("M2", Interval::below(3.0)),
                    ],
                    3,
                ),
                rule(
                    vec![
                        ("M1", Interval::at_least(5.0)),
                        ("M2", Interval::at_least(3.0)),
                    ],
                    3,
                ),
            ],
        );
        let out = aggregate(&rb);
        assert_eq!(
            out.rules,
            vec![
                rule(vec![("M1", Interval::below(5.0))], 1),
                rule(vec![("M1", Interval::at_least(5.0))], 3),
            ]
        );
    }

    #[test]
    fn single_rule_unchanged() {
        let rb = RuleBase::new("A", "S", vec![rule(vec![("M1", Interval::below(5.0))], 4)]);
        assert_eq!(aggregate(&rb), rb);
    }

    #[test]
    fn gap_or_different_weight_blocks_merge() {
        let rb = RuleBase::new(
            "A",
            "S",
            vec![
                rule(vec![("M1", Interval::below(5.0))], 2),
                rule(vec![("M1", Interval::above(5.0))], 2),
                rule(vec![("M1", Interval::new(5.0, true, 5.0, true))], 1),
            ],
        );
        assert_eq!(aggregate(&rb).rules.len(), 3);
    }

    #[test]
    fn chains_merge_to_fixed_point() {
        let rb = RuleBase::new(
            "A",
            "S",
            vec![
                rule(vec![("M1", Interval::below(0.0))], 2),
                rule(vec![("M1", Interval::new(0.0, true, 1.0, false))], 2),
                rule(vec![("M1", Interval::at_least(1.0))], 2),
            ],
        );
        let out = aggregate(&rb);
        assert_eq!(out.rules, vec![Rule::new(vec![], 2)]);
    }

    /// Random partitions: a grid over two measures with random weights.
    fn grid_rule_base(cuts1: Vec<i32>, cuts2: Vec<i32>, weights: Vec<u32>) -> RuleBase {
        let cells = |cuts: &[i32]| -> Vec<Interval> {
            let mut c: Vec<f64> = cuts.iter().map(|&x| x as f64).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            let mut out = Vec::new();
            let mut lo = f64::NEG_INFINITY;
            for &x in &c {
                out.push(Interval::new(lo, true, x, false));
                lo = x;
            }
            out.push(Interval::new(lo, true, f64::INFINITY, false));
            out
        };
        let (c1, c2) = (cells(&cuts1), cells(&cuts2));
        let mut rules = Vec::new();
        let mut k = 0;
        for a in &c1 {
            for b in &c2 {
                let mut conds = Vec::new();
                if !a.is_full() {
                    conds.push(Condition::new("M1", *a));
                }
                if !b.is_full() {
                    conds.push(Condition::new("M2", *b));
                }
                rules.push(Rule::new(conds, weights[k % weights.len()]));
                k += 1;
            }
        }
        RuleBase::new("A", "S", rules)
    }

    proptest! {
        #[test]
        fn aggregation_preserves_semantics(
            cuts1 in proptest::collection::vec(-5i32..5, 0..4),
            cuts2 in proptest::collection::vec(-5i32..5, 0..4),
            weights in proptest::collection::vec(0u32..3, 1..20),
        ) {
            let rb = grid_rule_base(cuts1, cuts2, weights);
            prop_assert!(rb.validate(5).is_empty());
            let out = aggregate(&rb);
            prop_assert!(out.rules.len() <= rb.rules.len());
            prop_assert!(out.validate(5).is_empty());
            let ms = names(&["M1", "M2"]);
            let (a, b) = (rb.compile(&ms).unwrap(), out.compile(&ms).unwrap());
            for i in -14..=14 {
                for j in -14..=14 {
                    let p = [i as f64 / 2.0, j as f64 / 2.0];
                    prop_assert_eq!(a.propose(&p).unwrap(), b.propose(&p).unwrap());
                }
            }
        }
    }
}
