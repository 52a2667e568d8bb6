//! One-vs-rest chi-squared scoring of binary term presence.

use super::SparseVector;
use crate::error::{Error, Result};
use crate::label::{LoeLabel, NUM_LEVELS};

/// Chi-squared statistic of a 2x2 contingency table
/// `[[a, b], [c, d]]` = `[[present & in-class, present & out-of-class],
/// [absent & in-class, absent & out-of-class]]`. Zero when any margin is
/// empty.
pub fn chi2_statistic(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    let diff = a * d - b * c;
    n * diff * diff / denom
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chi2Selection {
    /// Selected feature indices, ascending.
    pub selected: Vec<usize>,
    /// Score of every feature (max over classes).
    pub scores: Vec<f64>,
}

/// Picks the `k` features with the highest chi-squared score, where a
/// feature's score is its maximum one-vs-rest statistic over the classes
/// present. Ties go to the lower feature index.
pub fn chi2_select(
    vectors: &[SparseVector],
    labels: &[LoeLabel],
    n_features: usize,
    k: usize,
) -> Result<Chi2Selection> {
    if vectors.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: vectors.len(),
            right: labels.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("chi2_select needs k >= 1".into()));
    }
    let n = vectors.len() as f64;
    let mut class_total = [0.0f64; NUM_LEVELS];
    for l in labels {
        class_total[l.ordinal()] += 1.0;
    }
    // present[f][c]: documents of class c containing feature f.
    let mut present = vec![[0.0f64; NUM_LEVELS]; n_features];
    for (v, l) in vectors.iter().zip(labels) {
        for i in v.indices().filter(|&i| i < n_features) {
            present[i][l.ordinal()] += 1.0;
        }
    }
    let scores: Vec<f64> = present
        .iter()
        .map(|row| {
            let with_feature: f64 = row.iter().sum();
            (0..NUM_LEVELS)
                .filter(|&c| class_total[c] > 0.0)
                .map(|c| {
                    let a = row[c];
                    let b = with_feature - a;
                    let cc = class_total[c] - a;
                    let d = n - a - b - cc;
                    chi2_statistic(a, b, cc, d)
                })
                .fold(0.0, f64::max)
        })
        .collect();

    if k > n_features {
        log::warn!("chi2_select: k = {k} exceeds feature count {n_features}; keeping all");
    }
    let mut order: Vec<usize> = (0..n_features).collect();
    order.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    let mut selected: Vec<usize> = order.into_iter().take(k).collect();
    selected.sort_unstable();
    Ok(Chi2Selection { selected, scores })
}
