//! Seeded synthetic corpora for tests, demos and desk-scale experiments.

use std::collections::BTreeMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, LabeledDataset};
use crate::eval::trec::Qrels;
use crate::label::{LoeLabel, NUM_LEVELS};

/// Level mix of the manually labeled guideline dataset.
pub const GUIDELINE_MIX: [f64; NUM_LEVELS] = [0.14, 0.18, 0.10, 0.24, 0.12, 0.07, 0.15];

/// Level mix of a machine-labeled Medline-scale collection.
pub const MEDLINE_MIX: [f64; NUM_LEVELS] = [0.07, 0.07, 0.10, 0.19, 0.07, 0.09, 0.41];

/// Words typical of each level's study design.
pub const LEVEL_CUES: [&[&str]; NUM_LEVELS] = [
    &["systematic", "review", "metaanalysis", "pooled", "rcts"],
    &["randomized", "placebo", "blinded", "rct", "allocation"],
    &["review", "cohorts", "pooled", "prospective", "heterogeneity"],
    &["cohort", "prospective", "followup", "incidence", "hazard"],
    &["review", "casecontrol", "odds", "pooled", "controls"],
    &["casecontrol", "odds", "controls", "matched", "exposure"],
    &["case", "series", "report", "retrospective", "chart"],
];

const FILLER: &[&str] = &[
    "patients", "treatment", "outcome", "clinical", "disease", "therapy", "results", "group",
    "significant", "increased", "levels", "analysis", "data", "age", "women", "men", "children",
    "risk", "mortality", "hospital", "dose", "effect", "response", "symptoms", "diagnosis",
    "surgery", "infection", "chronic", "acute", "blood", "serum", "protein", "gene", "expression",
    "cells", "tumor", "cancer", "cardiac", "renal", "hepatic", "pulmonary", "pain", "quality",
    "life", "months", "years", "baseline", "compared", "associated", "observed",
];

pub fn sample_level(rng: &mut impl Rng, mix: &[f64; NUM_LEVELS]) -> LoeLabel {
    let dist = WeightedIndex::new(mix).expect("positive level mix");
    LoeLabel::ALL[dist.sample(rng)]
}

fn filler(rng: &mut impl Rng, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| *FILLER.choose(rng).expect("filler non-empty")).collect()
}

/// Every level uses its own invented vocabulary, so levels are perfectly
/// separable by term presence.
pub fn separable_dataset(n_per_class: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    for label in LoeLabel::ALL {
        for i in 0..n_per_class {
            let mut words: Vec<String> = (0..6)
                .map(|_| format!("c{}v{}x", label.ordinal(), rng.random_range(0..8)))
                .collect();
            words.extend(filler(&mut rng, 8).into_iter().map(String::from));
            let id = format!("s{}-{i:04}", label.as_str());
            items.push((Document::new(id, format!("study {i}"), words.join(" ")).with_gold(label), label));
        }
    }
    LabeledDataset::new("separable", items)
}

/// Levels drawn from the guideline mix; each abstract carries some of its
/// level's design cues (which overlap between levels) among filler, and a
/// fraction `label_noise` of labels is replaced by a random level.
pub fn noisy_dataset(n: usize, label_noise: f64, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(n);
    for i in 0..n {
        let true_label = sample_level(&mut rng, &GUIDELINE_MIX);
        let text = abstract_for(&mut rng, true_label, 0.5);
        let label = if rng.random_bool(label_noise) {
            LoeLabel::ALL[rng.random_range(0..NUM_LEVELS)]
        } else {
            true_label
        };
        items.push((
            Document::new(format!("n{i:05}"), "Clinical study", text).with_gold(label),
            label,
        ));
    }
    LabeledDataset::new("noisy", items)
}

/// Filler text with each of the level's cues included with probability
/// `cue_rate` (at least one is always present).
pub fn abstract_for(rng: &mut impl Rng, label: LoeLabel, cue_rate: f64) -> String {
    let cues = LEVEL_CUES[label.ordinal()];
    let mut words: Vec<&str> = cues.iter().copied().filter(|_| rng.random_bool(cue_rate)).collect();
    if words.is_empty() {
        words.push(cues.choose(rng).expect("cues non-empty"));
    }
    let n = rng.random_range(12..30);
    words.extend(filler(rng, n));
    for i in (1..words.len()).rev() {
        let j = rng.random_range(0..=i);
        words.swap(i, j);
    }
    words.join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedlineParams {
    pub n_docs: usize,
    pub n_topics: usize,
    /// On-topic documents per topic.
    pub docs_per_topic: usize,
    /// Probability that an on-topic document is relevant, by ordinal.
    pub relevance_by_level: [f64; NUM_LEVELS],
    pub seed: u64,
}

impl Default for MedlineParams {
    fn default() -> Self {
        MedlineParams {
            n_docs: 2000,
            n_topics: 20,
            docs_per_topic: 60,
            relevance_by_level: [0.75, 0.7, 0.5, 0.4, 0.3, 0.25, 0.15],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCollection {
    pub docs: Vec<Document>,
    pub topics: BTreeMap<String, String>,
    pub qrels: Qrels,
}

/// A collection whose levels follow the Medline mix, with topics whose
/// on-topic documents are more often relevant the stronger their evidence.
/// Every on-topic document is judged; background documents are not.
pub fn medline_like(params: &MedlineParams) -> SyntheticCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let topic_words: Vec<Vec<String>> = (0..params.n_topics)
        .map(|t| (0..3).map(|w| format!("t{t}w{w}x")).collect())
        .collect();
    let mut topic_of: Vec<Option<usize>> = vec![None; params.n_docs];
    let per_topic = params.docs_per_topic.min(params.n_docs / params.n_topics.max(1));
    let mut order: Vec<usize> = (0..params.n_docs).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    for (slot, &doc) in order.iter().take(per_topic * params.n_topics).enumerate() {
        topic_of[doc] = Some(slot / per_topic.max(1));
    }
    let mut docs = Vec::with_capacity(params.n_docs);
    let mut qrels = Qrels::default();
    for (i, topic) in topic_of.iter().enumerate() {
        let label = sample_level(&mut rng, &MEDLINE_MIX);
        let mut text = abstract_for(&mut rng, label, 0.4);
        let doc_id = format!("M{:06}", i + 1);
        if let Some(t) = *topic {
            let words = &topic_words[t];
            let mut extra = Vec::new();
            for w in words {
                if rng.random_bool(0.8) {
                    for _ in 0..rng.random_range(1..=3) {
                        extra.push(w.as_str());
                    }
                }
            }
            if extra.is_empty() {
                extra.push(words[0].as_str());
            }
            text = format!("{} {text}", extra.join(" "));
            let grade = if rng.random_bool(params.relevance_by_level[label.ordinal()]) {
                if rng.random_bool(0.5) {
                    2
                } else {
                    1
                }
            } else {
                0
            };
            qrels
                .topics
                .entry(format!("{}", t + 1))
                .or_default()
                .insert(doc_id.clone(), grade);
        }
        docs.push(
            Document::new(doc_id, format!("Report {}", i + 1), text)
                .with_assigned(label)
                .with_gold(label),
        );
    }
    let topics = topic_words
        .iter()
        .enumerate()
        .map(|(t, w)| (format!("{}", t + 1), w.join(" ")))
        .collect();
    SyntheticCollection { docs, topics, qrels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::label_distribution;

    #[test]
    fn mixes_sum_to_one() {
        assert!((GUIDELINE_MIX.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((MEDLINE_MIX.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn medline_like_is_deterministic_and_shaped() {
        let p = MedlineParams::default();
        let a = medline_like(&p);
        assert_eq!(a, medline_like(&p));
        assert_eq!(a.docs.len(), 2000);
        assert_eq!(a.topics.len(), 20);
        let labels: Vec<LoeLabel> = a.docs.iter().map(|d| d.assigned_loe.unwrap()).collect();
        let ds = LabeledDataset::new("m", a.docs.iter().cloned().zip(labels).collect());
        let dist = label_distribution(&ds).unwrap();
        assert!((dist[&LoeLabel::L4] - 0.41).abs() < 0.04);
        assert!((dist[&LoeLabel::L1a] + dist[&LoeLabel::L1b] - 0.14).abs() < 0.03);
    }

    #[test]
    fn separable_vocabularies_are_disjoint() {
        let ds = separable_dataset(3, 1);
        assert_eq!(ds.len(), 21);
        let (d, l) = &ds.items[0];
        assert!(d.abstract_text.contains(&format!("c{}v", l.ordinal())));
    }
}
