//! Rank and classification metrics.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{LoeLabel, NUM_LEVELS};

/// Graded judgments of one topic: doc_id -> grade.
pub type TopicQrels = HashMap<String, u8>;

/// DCG with discount `max(1, log_base(rank))`.
pub fn dcg(grades: &[f64], k: usize, log_base: f64) -> f64 {
    grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| g / ((i + 1) as f64).log(log_base).max(1.0))
        .sum()
}

/// NDCG@k of a ranked list against a topic's judgments. Unjudged documents
/// count as grade 0. `None` when the topic has no relevant document.
pub fn ndcg_at_k(ranking: &[&str], qrels: &TopicQrels, k: usize, log_base: f64) -> Option<f64> {
    let mut ideal: Vec<f64> = qrels.values().filter(|g| **g > 0).map(|&g| g as f64).collect();
    if ideal.is_empty() || k == 0 {
        return None;
    }
    ideal.sort_by(|a, b| b.total_cmp(a));
    let gains: Vec<f64> = ranking
        .iter()
        .take(k)
        .map(|d| qrels.get(*d).copied().unwrap_or(0) as f64)
        .collect();
    Some(dcg(&gains, k, log_base) / dcg(&ideal, k, log_base))
}

/// NDCG over the ranking with unjudged documents removed.
pub fn condensed_ndcg(ranking: &[&str], qrels: &TopicQrels, k: usize, log_base: f64) -> Option<f64> {
    let judged: Vec<&str> = ranking.iter().copied().filter(|d| qrels.contains_key(*d)).collect();
    ndcg_at_k(&judged, qrels, k, log_base)
}

fn relevant(qrels: &TopicQrels, doc: &str) -> bool {
    qrels.get(doc).is_some_and(|g| *g >= 1)
}

pub fn precision_at(ranking: &[&str], qrels: &TopicQrels, k: usize) -> f64 {
    let hits = ranking.iter().take(k).filter(|d| relevant(qrels, d)).count();
    hits as f64 / k as f64
}

pub fn p_at_10(ranking: &[&str], qrels: &TopicQrels) -> f64 {
    precision_at(ranking, qrels, 10)
}

/// Precision at rank R, R being the topic's relevant count.
pub fn r_prec(ranking: &[&str], qrels: &TopicQrels) -> Option<f64> {
    let r = qrels.values().filter(|g| **g >= 1).count();
    (r > 0).then(|| precision_at(ranking, qrels, r))
}

/// Rows are true levels, columns predicted levels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_LEVELS]; NUM_LEVELS],
}

impl ConfusionMatrix {
    pub fn get(&self, truth: LoeLabel, predicted: LoeLabel) -> u64 {
        self.counts[truth.ordinal()][predicted.ordinal()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn f1(&self, label: LoeLabel) -> f64 {
        let c = label.ordinal();
        let tp = self.counts[c][c] as f64;
        let predicted: u64 = (0..NUM_LEVELS).map(|r| self.counts[r][c]).sum();
        let actual: u64 = self.counts[c].iter().sum();
        let p = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let r = if actual > 0 { tp / actual as f64 } else { 0.0 };
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Mean F1 over levels occurring in truth or predictions.
    pub fn macro_f1(&self) -> f64 {
        let present: Vec<LoeLabel> = LoeLabel::ALL
            .into_iter()
            .filter(|l| {
                let c = l.ordinal();
                self.counts[c].iter().sum::<u64>() > 0 || (0..NUM_LEVELS).any(|r| self.counts[r][c] > 0)
            })
            .collect();
        if present.is_empty() {
            return 0.0;
        }
        present.iter().map(|l| self.f1(*l)).sum::<f64>() / present.len() as f64
    }
}

fn check_lengths(truths: &[LoeLabel], preds: &[LoeLabel]) -> Result<()> {
    if truths.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: truths.len(),
            right: preds.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::Empty("label lists"));
    }
    Ok(())
}

pub fn confusion_matrix(truths: &[LoeLabel], preds: &[LoeLabel]) -> Result<ConfusionMatrix> {
    check_lengths(truths, preds)?;
    let mut m = ConfusionMatrix::default();
    for (t, p) in truths.iter().zip(preds) {
        m.counts[t.ordinal()][p.ordinal()] += 1;
    }
    Ok(m)
}

pub fn macro_f1(truths: &[LoeLabel], preds: &[LoeLabel]) -> Result<f64> {
    Ok(confusion_matrix(truths, preds)?.macro_f1())
}

/// Root-mean-square ordinal error.
pub fn rmse(truths: &[LoeLabel], preds: &[LoeLabel]) -> Result<f64> {
    check_lengths(truths, preds)?;
    let sq: f64 = truths
        .iter()
        .zip(preds)
        .map(|(t, p)| {
            let d = t.ordinal() as f64 - p.ordinal() as f64;
            d * d
        })
        .sum();
    Ok((sq / truths.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use LoeLabel::*;

    fn qrels(pairs: &[(&str, u8)]) -> TopicQrels {
        pairs.iter().map(|(d, g)| (d.to_string(), *g)).collect()
    }

    #[test]
    fn ndcg_hand_examples() {
        let q = qrels(&[("d1", 2), ("d2", 1)]);
        let v = ndcg_at_k(&["d3", "d2", "d1"], &q, 10, 2.0).unwrap();
        let expected = (1.0 + 2.0 / 3f64.log2()) / 3.0;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.7540).abs() < 1e-4);
        assert_eq!(ndcg_at_k(&["d2", "d1"], &q, 10, 2.0), Some(1.0));
        assert_eq!(ndcg_at_k(&["d1", "d2"], &q, 10, 2.0), Some(1.0));
        assert_eq!(ndcg_at_k(&["d1"], &qrels(&[("d1", 0)]), 10, 2.0), None);
    }

    #[test]
    fn condensed_drops_unjudged() {
        let q = qrels(&[("d1", 2), ("d2", 1)]);
        assert_eq!(condensed_ndcg(&["d3", "d2", "d1"], &q, 10, 2.0), Some(1.0));
    }

    #[test]
    fn precision_examples() {
        let q = qrels(&[("a", 1), ("b", 2), ("c", 1), ("d", 1), ("x", 0)]);
        assert_eq!(p_at_10(&["a", "x", "b", "c"], &q), 0.3);
        assert_eq!(r_prec(&["a", "x", "y", "b", "c"], &q), Some(0.5));
        assert_eq!(p_at_10(&["a", "b", "c", "d", "x"], &q), 0.4);
        let all = qrels(&[("1", 1), ("2", 1), ("3", 1), ("4", 1), ("5", 1)]);
        assert_eq!(p_at_10(&["1", "2", "3", "4", "5"], &all), 0.5);
        assert_eq!(r_prec(&["a"], &qrels(&[("a", 0)])), None);
    }

    #[test]
    fn f1_examples() {
        let v = macro_f1(&[L1a, L1a, L1b, L1b], &[L1a, L1b, L1b, L1b]).unwrap();
        assert!((v - 0.7333).abs() < 1e-4);
        let v = macro_f1(&[L1a, L1a, L1b, L1b], &[L1a; 4]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(macro_f1(&[L3a, L4], &[L3a, L4]).unwrap(), 1.0);
        assert!(macro_f1(&[], &[]).is_err());
        assert!(macro_f1(&[L1a], &[]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[L1a, L2b, L4], &[L1a, L2b, L4]).unwrap(), 0.0);
        let v = rmse(&[L1a, L2b, L4], &[L1a, L1b, L4]).unwrap();
        assert!((v - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(rmse(&[L1a], &[L4]).unwrap(), 6.0);
    }

    #[test]
    fn confusion_rows_match_truth_counts() {
        let m = confusion_matrix(&[L1a, L1a, L4], &[L4, L1a, L4]).unwrap();
        assert_eq!(m.get(L1a, L4), 1);
        assert_eq!(m.counts[0].iter().sum::<u64>(), 2);
        assert_eq!(m.total(), 3);
    }

    fn arb_ranking() -> impl Strategy<Value = (Vec<u8>, Vec<usize>)> {
        (proptest::collection::vec(0u8..3, 1..30), any::<u64>()).prop_map(|(grades, seed)| {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut order: Vec<usize> = (0..grades.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            (grades, order)
        })
    }

    proptest! {
        #[test]
        fn ndcg_bounds_and_ideal((grades, order) in arb_ranking(), k in 1usize..15) {
            let names: Vec<String> = (0..grades.len()).map(|i| format!("d{i}")).collect();
            let q: TopicQrels = names.iter().cloned().zip(grades.iter().copied()).collect();
            let ranking: Vec<&str> = order.iter().map(|&i| names[i].as_str()).collect();
            if let Some(v) = ndcg_at_k(&ranking, &q, k, 2.0) {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
                let mut ideal: Vec<usize> = (0..grades.len()).collect();
                ideal.sort_by(|a, b| grades[*b].cmp(&grades[*a]));
                let ideal: Vec<&str> = ideal.iter().map(|&i| names[i].as_str()).collect();
                prop_assert!((ndcg_at_k(&ideal, &q, k, 2.0).unwrap() - 1.0).abs() < 1e-12);
                let mut padded = ranking.clone();
                padded.truncate(k);
                let extra: Vec<String> = (0..5).map(|i| format!("junk{i}")).collect();
                padded.extend(extra.iter().map(String::as_str));
                prop_assert_eq!(ndcg_at_k(&padded, &q, k, 2.0), ndcg_at_k(&ranking, &q, k, 2.0));
            } else {
                prop_assert!(grades.iter().all(|g| *g == 0));
            }
            prop_assert!((0.0..=1.0).contains(&p_at_10(&ranking, &q)));
        }
    }
}
