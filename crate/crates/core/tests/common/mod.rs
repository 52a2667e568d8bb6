//! Brute-force reference implementations and planted models shared by the
//! integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use loe_core::classifier::explain::kernel;
use loe_core::classifier::Classifier;
use loe_core::corpus::Document;
use loe_core::index::FilterBand;
use loe_core::textproc::{TermSequence, Tokenizer};
use loe_core::{ClassScores, LoeLabel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- metrics

fn discount(rank: usize, base: f64) -> f64 {
    if (rank as f64) <= base {
        1.0
    } else {
        (rank as f64).ln() / base.ln()
    }
}

pub fn ndcg(ranking: &[&str], qrels: &HashMap<String, u8>, k: usize, base: f64) -> Option<f64> {
    let mut actual = 0.0;
    for (i, d) in ranking.iter().enumerate() {
        if i == k {
            break;
        }
        let g = match qrels.get(*d) {
            Some(g) => *g as f64,
            None => 0.0,
        };
        actual += g / discount(i + 1, base);
    }
    let mut by_grade = [0usize; 256];
    for g in qrels.values() {
        by_grade[*g as usize] += 1;
    }
    let mut ideal = 0.0;
    let mut rank = 0;
    for g in (1..256).rev() {
        for _ in 0..by_grade[g] {
            rank += 1;
            if rank <= k {
                ideal += g as f64 / discount(rank, base);
            }
        }
    }
    if ideal == 0.0 {
        None
    } else {
        Some(actual / ideal)
    }
}

fn hits_in_prefix(ranking: &[&str], qrels: &HashMap<String, u8>, n: usize) -> usize {
    let mut hits = 0;
    for i in 0..n {
        if let Some(d) = ranking.get(i) {
            if qrels.get(*d).copied().unwrap_or(0) > 0 {
                hits += 1;
            }
        }
    }
    hits
}

pub fn p_at_10(ranking: &[&str], qrels: &HashMap<String, u8>) -> f64 {
    hits_in_prefix(ranking, qrels, 10) as f64 / 10.0
}

pub fn r_prec(ranking: &[&str], qrels: &HashMap<String, u8>) -> Option<f64> {
    let r = qrels.values().filter(|g| **g > 0).count();
    if r == 0 {
        return None;
    }
    Some(hits_in_prefix(ranking, qrels, r) as f64 / r as f64)
}

pub fn macro_f1(truths: &[LoeLabel], preds: &[LoeLabel]) -> f64 {
    let mut total = 0.0;
    let mut classes = 0;
    for c in LoeLabel::ALL {
        let tp = truths.iter().zip(preds).filter(|(t, p)| **t == c && **p == c).count() as f64;
        let fp = truths.iter().zip(preds).filter(|(t, p)| **t != c && **p == c).count() as f64;
        let fne = truths.iter().zip(preds).filter(|(t, p)| **t == c && **p != c).count() as f64;
        if tp + fp + fne == 0.0 {
            continue;
        }
        classes += 1;
        // F1 = 2TP / (2TP + FP + FN)
        total += 2.0 * tp / (2.0 * tp + fp + fne);
    }
    total / classes as f64
}

pub fn rmse(truths: &[LoeLabel], preds: &[LoeLabel]) -> f64 {
    let mut acc = 0.0;
    for (t, p) in truths.iter().zip(preds) {
        let d = t.ordinal() as f64 - p.ordinal() as f64;
        acc += d * d;
    }
    (acc / truths.len() as f64).sqrt()
}

/// A random ranking over a small pool with graded, partly judged docs.
pub struct RankInstance {
    pub ranking: Vec<String>,
    pub qrels: HashMap<String, u8>,
}

impl RankInstance {
    pub fn ranking(&self) -> Vec<&str> {
        self.ranking.iter().map(String::as_str).collect()
    }
}

pub fn random_rank_instance(rng: &mut impl Rng) -> RankInstance {
    let pool = rng.random_range(1..40);
    let mut ids: Vec<String> = (0..pool).map(|i| format!("d{i}")).collect();
    let mut qrels = HashMap::new();
    for id in &ids {
        if rng.random_bool(0.6) {
            qrels.insert(id.clone(), rng.random_range(0..=3));
        }
    }
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    ids.truncate(rng.random_range(0..=pool));
    RankInstance { ranking: ids, qrels }
}

pub fn random_labels(rng: &mut impl Rng, n: usize) -> (Vec<LoeLabel>, Vec<LoeLabel>) {
    let classes = rng.random_range(1..=7);
    let t = (0..n).map(|_| LoeLabel::ALL[rng.random_range(0..classes)]).collect();
    let p = (0..n).map(|_| LoeLabel::ALL[rng.random_range(0..7)]).collect();
    (t, p)
}

// ---------------------------------------------------------------- BM25

pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

/// Scores every document against the query and sorts by descending score,
/// then doc_id.
pub fn exhaustive_search(
    docs: &[Document],
    tokenizer: &Tokenizer,
    query: &str,
    band: FilterBand,
    k: usize,
    k1: f64,
    b: f64,
) -> Vec<Hit> {
    let counted: Vec<(HashMap<String, u32>, usize)> = docs
        .iter()
        .map(|d| {
            let toks = tokenizer.unigrams(&d.text());
            let mut tf = HashMap::new();
            for t in &toks {
                *tf.entry(t.clone()).or_insert(0u32) += 1;
            }
            (tf, toks.len())
        })
        .collect();
    let n = docs.len() as f64;
    let total: usize = counted.iter().map(|c| c.1).sum();
    let avg = total as f64 / n;
    let mut q_terms: Vec<String> = Vec::new();
    for t in tokenizer.unigrams(query) {
        if !q_terms.contains(&t) {
            q_terms.push(t);
        }
    }
    let idf: Vec<f64> = q_terms
        .iter()
        .map(|t| {
            let df = counted.iter().filter(|c| c.0.contains_key(t)).count() as f64;
            ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
        })
        .collect();
    let mut hits = Vec::new();
    for (doc, (tf, len)) in docs.iter().zip(&counted) {
        if !band.admits(doc.assigned_loe.expect("level assigned")) {
            continue;
        }
        let mut score = 0.0;
        for (t, w) in q_terms.iter().zip(&idf) {
            if let Some(&f) = tf.get(t) {
                let f = f as f64;
                let norm = *len as f64 / avg;
                score += w * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * norm));
            }
        }
        if score > 0.0 {
            hits.push(Hit { doc_id: doc.doc_id.clone(), score });
        }
    }
    hits.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.doc_id.cmp(&y.doc_id)));
    hits.truncate(k);
    hits
}

/// A random corpus of `n` documents over `vocab` invented words.
pub fn random_corpus(rng: &mut impl Rng, n: usize, vocab: usize) -> Vec<Document> {
    let words: Vec<String> = (0..vocab).map(word).collect();
    (0..n)
        .map(|i| {
            let len = rng.random_range(1..25);
            let text: Vec<&str> = (0..len)
                .map(|_| {
                    // Skewed toward low ids so that terms repeat.
                    let a = rng.random_range(0..vocab);
                    let b = rng.random_range(0..vocab);
                    words[a.min(b)].as_str()
                })
                .collect();
            let split = rng.random_range(0..=text.len().min(4));
            Document::new(format!("doc{:04}", rng.random_range(0..100_000) * 1000 + i), text[..split].join(" "), text[split..].join(" "))
                .with_assigned(LoeLabel::ALL[rng.random_range(0..7)])
        })
        .collect()
}

pub fn random_query(rng: &mut impl Rng, vocab: usize) -> String {
    let n = rng.random_range(1..5);
    (0..n).map(|_| word(rng.random_range(0..vocab))).collect::<Vec<_>>().join(" ")
}

/// Letters only, so every word survives tokenization as its own stem.
pub fn word(i: usize) -> String {
    let mut s = String::from("q");
    let mut x = i;
    loop {
        s.push((b'b' + (x % 20) as u8) as char);
        x /= 20;
        if x == 0 {
            break;
        }
    }
    s.push('z');
    s
}

// ---------------------------------------------------------------- models

/// Confidence for one level rises with a single marker term.
pub struct OneToken {
    pub token: String,
    pub level: LoeLabel,
}

impl Classifier for OneToken {
    fn model_id(&self) -> &str {
        "planted-one-token"
    }

    fn confidences(&self, terms: &TermSequence) -> ClassScores {
        let present = terms.terms().contains(&self.token);
        let hit = if present { 0.9 } else { 0.1 };
        let mut s = ClassScores::uniform((1.0 - hit) / 6.0);
        s.set(self.level, hit);
        s
    }
}

/// Interaction between two terms for the trial level.
pub struct TwoTerm;

impl Classifier for TwoTerm {
    fn model_id(&self) -> &str {
        "planted-two-term"
    }

    fn confidences(&self, t: &TermSequence) -> ClassScores {
        let has = |w: &str| t.terms().iter().any(|x| x == w);
        let trial = if has("rct") && has("random") {
            0.9
        } else if has("rct") {
            0.6
        } else {
            0.1
        };
        let mut s = ClassScores::default();
        s.set(LoeLabel::L1b, trial);
        s.set(LoeLabel::L4, 1.0 - trial);
        s
    }
}

pub struct Constant;

impl Classifier for Constant {
    fn model_id(&self) -> &str {
        "constant"
    }

    fn confidences(&self, _: &TermSequence) -> ClassScores {
        ClassScores::one_hot(LoeLabel::L2b)
    }
}

// ---------------------------------------------------------------- explainer

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64)
}

/// Expected surrogate weights of the sampling explainer, computed by
/// enumerating all `2^m` masks with their sampling probability. Returns
/// `[level][term]` in first-occurrence term order.
pub fn enumerated_surrogate(
    model: &dyn Classifier,
    terms: &TermSequence,
    n_samples: usize,
    width: f64,
    ridge: f64,
) -> Vec<Vec<f64>> {
    let feats: Vec<String> = terms.distinct().into_iter().map(String::from).collect();
    let m = feats.len();
    assert!(m <= 16, "enumeration is exponential");
    let p = m + 1;
    let n = n_samples as f64;
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DMatrix::<f64>::zeros(p, 7);
    let mut total = 0.0;
    for bits in 0u32..(1 << m) {
        let kept = bits.count_ones() as usize;
        // The unmasked sample is always drawn once; the rest remove a
        // uniform count of terms chosen uniformly.
        let prob = if kept == m {
            1.0 / n
        } else {
            (n - 1.0) / n / m as f64 / binom(m, m - kept)
        };
        let w = prob * kernel(kept as f64 / m as f64, width);
        let mut x = vec![1.0; p];
        for j in 0..m {
            x[j + 1] = f64::from(bits >> j & 1);
        }
        let variant = terms.retain(|t| {
            let j = feats.iter().position(|f| f == t).expect("known term");
            bits >> j & 1 == 1
        });
        let y = model.confidences(&variant);
        total += w;
        for a in 0..p {
            for c in 0..p {
                gram[(a, c)] += w * x[a] * x[c];
            }
            for c in 0..7 {
                rhs[(a, c)] += w * x[a] * y.0[c];
            }
        }
    }
    gram /= total;
    rhs /= total;
    for j in 1..p {
        gram[(j, j)] += ridge;
    }
    let sol = gram.lu().solve(&rhs).expect("regularized system is solvable");
    (0..7).map(|c| (1..p).map(|j| sol[(j, c)]).collect()).collect()
}

pub fn relative_error(estimate: &[f64], exact: &[f64]) -> f64 {
    let num: f64 = estimate.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = exact.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}

/// Ten stem-stable terms for the explainer documents.
pub fn ten_terms() -> TermSequence {
    TermSequence::from_terms(
        ["rct", "random", "patient", "outcom", "dose", "placebo", "week", "trial", "blind", "group"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    )
}

/// A random document of 3..=10 distinct invented terms containing `token`.
pub fn random_document_with(rng: &mut ChaCha8Rng, token: &str) -> TermSequence {
    let m = rng.random_range(3..=10);
    let mut terms: Vec<String> = rand::seq::index::sample(rng, 200, m - 1).into_iter().map(word).collect();
    let at = rng.random_range(0..=terms.len());
    terms.insert(at, token.to_string());
    TermSequence::from_terms(terms)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn level_counts(labels: &[LoeLabel]) -> BTreeMap<LoeLabel, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(*l).or_insert(0) += 1;
    }
    m
}
