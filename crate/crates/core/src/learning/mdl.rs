//! Supervised discretization by recursive minimum-entropy splitting with the
//! MDL stopping rule of Fayyad and Irani.

use super::examples::Label;

/// Two cut candidates whose weighted entropies differ by less than this are
/// considered tied; the lower cut wins.
pub const ENTROPY_TIE: f64 = 1e-12;

/// Sorted cut points for `values` labelled by `labels`. A value `x` falls
/// left of cut `c` when `x < c`.
///
/// # Panics
///
/// If `values` and `labels` differ in length.
pub fn mdl_discretize(values: &[f64], labels: &[Label]) -> Vec<f64> {
    assert_eq!(values.len(), labels.len(), "one label per value");
    let mut items: Vec<(f64, bool)> = values
        .iter()
        .zip(labels)
        .map(|(&v, &l)| (v, l == Label::Success))
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cuts = Vec::new();
    split(&items, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

pub(crate) fn entropy(success: usize, failure: usize) -> f64 {
    let n = (success + failure) as f64;
    [success, failure]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn classes(success: usize, failure: usize) -> f64 {
    ((success > 0) as u8 + (failure > 0) as u8) as f64
}

/// Midpoint of two adjacent distinct values, strictly above `lo`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mut mid = lo / 2.0 + hi / 2.0;
    if mid <= lo {
        mid = hi;
    }
    mid
}

/// Gain threshold of the MDL criterion for a binary split of `n` items.
pub(crate) fn mdl_threshold(
    n: usize,
    total: (usize, usize),
    left: (usize, usize),
    right: (usize, usize),
) -> f64 {
    let k = classes(total.0, total.1);
    let k1 = classes(left.0, left.1);
    let k2 = classes(right.0, right.1);
    let delta = (3f64.powf(k) - 2.0).log2()
        - (k * entropy(total.0, total.1)
            - k1 * entropy(left.0, left.1)
            - k2 * entropy(right.0, right.1));
    let n = n as f64;
    ((n - 1.0).log2() + delta) / n
}

fn split(items: &[(f64, bool)], cuts: &mut Vec<f64>) {
    let n = items.len();
    if n < 2 {
        return;
    }
    // Runs of equal values, with per-class counts.
    let mut groups: Vec<(f64, usize, usize, usize)> = Vec::new(); // value, end, success, failure
    for (i, &(v, s)) in items.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if g.0 == v => {
                g.1 = i + 1;
                if s {
                    g.2 += 1
                } else {
                    g.3 += 1
                }
            }
            _ => groups.push((v, i + 1, s as usize, (!s) as usize)),
        }
    }
    let total_s = items.iter().filter(|x| x.1).count();
    let total = (total_s, n - total_s);
    let base = entropy(total.0, total.1);
    if base == 0.0 || groups.len() < 2 {
        return;
    }

    let pure_class = |g: &(f64, usize, usize, usize)| match (g.2, g.3) {
        (_, 0) => Some(true),
        (0, _) => Some(false),
        _ => None,
    };
    let mut best: Option<(f64, usize, (usize, usize))> = None;
    let mut left = (0usize, 0usize);
    for j in 0..groups.len() - 1 {
        left.0 += groups[j].2;
        left.1 += groups[j].3;
        let a = pure_class(&groups[j]);
        let b = pure_class(&groups[j + 1]);
        if a.is_some() && a == b {
            continue;
        }
        let nl = groups[j].1;
        let right = (total.0 - left.0, total.1 - left.1);
        let e = (nl as f64 / n as f64) * entropy(left.0, left.1)
            + ((n - nl) as f64 / n as f64) * entropy(right.0, right.1);
        if best.is_none_or(|(be, _, _)| e < be - ENTROPY_TIE) {
            best = Some((e, j, left));
        }
    }
    let Some((e, j, left)) = best else {
        return;
    };
    let right = (total.0 - left.0, total.1 - left.1);
    if base - e <= mdl_threshold(n, total, left, right) {
        return;
    }
    let at = groups[j].1;
    cuts.push(midpoint(groups[j].0, groups[j + 1].0));
    split(&items[..at], cuts);
    split(&items[at..], cuts);
}
