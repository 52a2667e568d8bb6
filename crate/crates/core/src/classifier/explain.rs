//! Local surrogate explanations by random term masking.
//!
//! Each masked variant keeps a random subset of the document's distinct
//! terms. A weighted linear model per class is fitted on the retained-term
//! indicators, with weight `exp(-(1 - s)^2 / width^2)` where `s` is the
//! fraction of terms kept.

use std::collections::{BTreeMap, HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::label::{ClassScores, LoeLabel, NUM_LEVELS};
use crate::textproc::TermSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainParams {
    pub n_samples: usize,
    pub kernel_width: f64,
    /// Ridge penalty on term weights, relative to total sample weight.
    pub ridge: f64,
    pub seed: u64,
}

impl Default for ExplainParams {
    fn default() -> Self {
        ExplainParams {
            n_samples: 500,
            kernel_width: 0.75,
            ridge: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub doc_id: String,
    pub predicted: LoeLabel,
    pub confidences: ClassScores,
    pub seed: u64,
    /// Per level, terms by descending weight (ties by term).
    pub weights: BTreeMap<LoeLabel, Vec<TermWeight>>,
    pub intercepts: ClassScores,
}

impl Explanation {
    pub fn top_term(&self, label: LoeLabel) -> Option<&str> {
        self.weights.get(&label)?.first().map(|t| t.term.as_str())
    }

    pub fn weight(&self, label: LoeLabel, term: &str) -> Option<f64> {
        self.weights.get(&label)?.iter().find(|t| t.term == term).map(|t| t.weight)
    }
}

pub fn kernel(retained_fraction: f64, width: f64) -> f64 {
    let d = 1.0 - retained_fraction;
    (-(d * d) / (width * width)).exp()
}

/// Draws the masks: the first keeps every term, each later one drops a
/// uniformly chosen number `1..=m` of terms at random.
pub fn sample_masks(m: usize, n_samples: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut masks = Vec::with_capacity(n_samples);
    if n_samples > 0 {
        masks.push(vec![true; m]);
    }
    for _ in 1..n_samples {
        let remove = rng.random_range(1..=m);
        let mut mask = vec![true; m];
        for i in rand::seq::index::sample(&mut rng, m, remove) {
            mask[i] = false;
        }
        masks.push(mask);
    }
    masks
}

/// Weighted ridge fit of every class at once. Returns `(intercepts,
/// coefficients[class][feature])`.
pub fn fit_surrogate(
    masks: &[Vec<bool>],
    targets: &[ClassScores],
    sample_weights: &[f64],
    ridge: f64,
) -> Result<(ClassScores, Vec<Vec<f64>>)> {
    let m = masks.first().map_or(0, Vec::len);
    let p = m + 1;
    let total: f64 = sample_weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("sample weights sum to zero".into()));
    }
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DMatrix::<f64>::zeros(p, NUM_LEVELS);
    let mut row = vec![0.0; p];
    for ((mask, y), &w) in masks.iter().zip(targets).zip(sample_weights) {
        let w = w / total;
        row[0] = 1.0;
        for (j, &keep) in mask.iter().enumerate() {
            row[j + 1] = if keep { 1.0 } else { 0.0 };
        }
        for a in 0..p {
            if row[a] == 0.0 {
                continue;
            }
            for b in 0..p {
                gram[(a, b)] += w * row[a] * row[b];
            }
            for c in 0..NUM_LEVELS {
                rhs[(a, c)] += w * row[a] * y.0[c];
            }
        }
    }
    for j in 1..p {
        gram[(j, j)] += ridge;
    }
    let solution = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidArgument("surrogate system is singular".into()))?,
    };
    let mut intercepts = ClassScores::default();
    let mut coef = vec![vec![0.0; m]; NUM_LEVELS];
    for c in 0..NUM_LEVELS {
        let col: DVector<f64> = solution.column(c).into_owned();
        intercepts.0[c] = col[0];
        for j in 0..m {
            coef[c][j] = col[j + 1];
        }
    }
    Ok((intercepts, coef))
}

/// Explains the classifier's output on one term sequence.
pub fn explain<C: Classifier + ?Sized>(
    model: &C,
    doc_id: &str,
    terms: &TermSequence,
    params: &ExplainParams,
) -> Result<Explanation> {
    let features: Vec<String> = terms.distinct().into_iter().map(str::to_string).collect();
    let m = features.len();
    if m == 0 {
        return Err(Error::Empty("document has no terms to explain"));
    }
    if params.n_samples < 2 {
        return Err(Error::InvalidArgument("explain needs at least 2 samples".into()));
    }
    if !(params.kernel_width > 0.0 && params.kernel_width.is_finite()) {
        return Err(Error::InvalidArgument("kernel width must be positive".into()));
    }
    let position: HashMap<&str, usize> = features.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let masks = sample_masks(m, params.n_samples, params.seed);
    let mut targets = Vec::with_capacity(masks.len());
    let mut weights = Vec::with_capacity(masks.len());
    for mask in &masks {
        let variant = terms.retain(|t| mask[position[t]]);
        targets.push(model.confidences(&variant));
        let kept = mask.iter().filter(|k| **k).count() as f64 / m as f64;
        weights.push(kernel(kept, params.kernel_width));
    }
    let confidences = targets[0];
    let (intercepts, coef) = fit_surrogate(&masks, &targets, &weights, params.ridge)?;
    let mut by_class = BTreeMap::new();
    for label in LoeLabel::ALL {
        let mut list: Vec<TermWeight> = features
            .iter()
            .zip(&coef[label.ordinal()])
            .map(|(t, &w)| TermWeight { term: t.clone(), weight: w })
            .collect();
        list.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
        by_class.insert(label, list);
    }
    Ok(Explanation {
        doc_id: doc_id.to_string(),
        predicted: confidences.argmax(),
        confidences,
        seed: params.seed,
        weights: by_class,
        intercepts,
    })
}

pub fn explain_document<C: Classifier + ?Sized>(
    model: &C,
    doc: &Document,
    params: &ExplainParams,
) -> Result<Explanation> {
    let terms = model.tokenizer().tokenize(&doc.text());
    explain(model, &doc.doc_id, &terms, params)
}

/// Sums each term's weight per level across explanations and keeps the
/// `top_k` positive totals, highest first.
pub fn aggregate_term_scores(
    explanations: &[Explanation],
    top_k: usize,
) -> Result<BTreeMap<LoeLabel, Vec<(String, f64)>>> {
    if explanations.is_empty() {
        return Err(Error::Empty("explanation list"));
    }
    let mut out = BTreeMap::new();
    for label in LoeLabel::ALL {
        let mut sums: HashMap<&str, f64> = HashMap::new();
        for e in explanations {
            let mut seen = HashSet::new();
            for tw in e.weights.get(&label).into_iter().flatten() {
                if seen.insert(tw.term.as_str()) {
                    *sums.entry(tw.term.as_str()).or_insert(0.0) += tw.weight;
                }
            }
        }
        let mut ranked: Vec<(String, f64)> = sums
            .into_iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(t, s)| (t.to_string(), s))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(top_k);
        out.insert(label, ranked);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Planted {
        token: &'static str,
        label: LoeLabel,
    }

    impl Classifier for Planted {
        fn model_id(&self) -> &str {
            "planted"
        }
        fn confidences(&self, terms: &TermSequence) -> ClassScores {
            if terms.terms().iter().any(|t| t == self.token) {
                ClassScores::one_hot(self.label)
            } else {
                ClassScores::one_hot(LoeLabel::L4)
            }
        }
    }

    struct Constant;

    impl Classifier for Constant {
        fn model_id(&self) -> &str {
            "constant"
        }
        fn confidences(&self, _: &TermSequence) -> ClassScores {
            ClassScores::uniform(1.0 / 7.0)
        }
    }

    fn seq(words: &[&str]) -> TermSequence {
        TermSequence::from_unigrams(words.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn planted_token_ranks_first() {
        let model = Planted { token: "rct", label: LoeLabel::L1b };
        let terms = seq(&["random", "rct", "patient", "outcom"]);
        let e = explain(&model, "d", &terms, &ExplainParams::default()).unwrap();
        assert_eq!(e.top_term(LoeLabel::L1b), Some("rct"));
        assert_eq!(e.predicted, LoeLabel::L1b);
        for list in e.weights.values() {
            assert_eq!(list.len(), terms.distinct().len());
        }
    }

    #[test]
    fn constant_model_has_no_signal() {
        let e = explain(&Constant, "d", &seq(&["a1", "b1", "c1"]), &ExplainParams::default()).unwrap();
        for list in e.weights.values() {
            for tw in list {
                assert!(tw.weight.abs() < 1e-6, "{tw:?}");
            }
        }
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let model = Planted { token: "rct", label: LoeLabel::L1a };
        let terms = seq(&["rct", "trial", "blind", "placebo"]);
        let p = ExplainParams { seed: 42, ..Default::default() };
        let a = explain(&model, "d", &terms, &p).unwrap();
        let b = explain(&model, "d", &terms, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_document_is_an_error() {
        assert!(explain(&Constant, "d", &seq(&[]), &ExplainParams::default()).is_err());
    }

    #[test]
    fn masks_follow_sampling_scheme() {
        let masks = sample_masks(5, 200, 1);
        assert!(masks[0].iter().all(|k| *k));
        for m in &masks[1..] {
            assert!(m.iter().any(|k| !k));
        }
    }

    #[test]
    fn aggregation_sums_and_filters() {
        let make = |pairs: &[(&str, f64)]| {
            let mut weights = BTreeMap::new();
            for l in LoeLabel::ALL {
                weights.insert(l, Vec::new());
            }
            weights.insert(
                LoeLabel::L1a,
                pairs.iter().map(|(t, w)| TermWeight { term: t.to_string(), weight: *w }).collect(),
            );
            Explanation {
                doc_id: "d".into(),
                predicted: LoeLabel::L1a,
                confidences: ClassScores::default(),
                seed: 0,
                weights,
                intercepts: ClassScores::default(),
            }
        };
        let agg = aggregate_term_scores(&[make(&[("rct", 1.0), ("x", -0.5)]), make(&[("rct", 1.0)])], 10).unwrap();
        assert_eq!(agg[&LoeLabel::L1a], vec![("rct".to_string(), 2.0)]);
        assert!(agg[&LoeLabel::L4].is_empty());
        assert!(aggregate_term_scores(&[], 10).is_err());
    }
}
