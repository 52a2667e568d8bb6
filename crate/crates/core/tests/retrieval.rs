mod common;

use std::collections::HashSet;

use loe_core::eval::{run_experiment, ExperimentConfig};
use loe_core::index::{build_index, load_index, save_index, Bm25Params, FilterBand};
use loe_core::synth::{medline_like, MedlineParams};
use loe_core::textproc::Tokenizer;
use rand::Rng;

#[test]
fn evidence_filters_lift_ndcg_on_planted_collection() {
    for seed in 0..3 {
        let c = medline_like(&MedlineParams { seed, ..Default::default() });
        let idx = build_index(&c.docs, Bm25Params::default()).unwrap();
        let r = run_experiment(&idx, "synthetic", &c.topics, &c.qrels, &FilterBand::ALL, &ExperimentConfig::default())
            .unwrap();
        let delta: Vec<f64> = FilterBand::ALL.iter().map(|b| r.band(*b).unwrap().delta.ndcg).collect();
        assert_eq!(delta[0], 0.0);
        assert!(delta[3] >= 0.05, "seed {seed}: {delta:?}");
        assert!(delta.windows(2).all(|w| w[0] <= w[1]), "seed {seed}: {delta:?}");
        let again = run_experiment(&idx, "synthetic", &c.topics, &c.qrels, &FilterBand::ALL, &ExperimentConfig::default())
            .unwrap();
        assert_eq!(r, again);
    }
}

#[test]
fn search_matches_exhaustive_scoring() {
    let mut rng = common::rng(11);
    let tok = Tokenizer::default();
    for _ in 0..20 {
        let n = rng.random_range(1..=200);
        let vocab = rng.random_range(1..=200);
        let docs = common::random_corpus(&mut rng, n, vocab);
        let idx = build_index(&docs, Bm25Params::default()).unwrap();
        for _ in 0..5 {
            let q = common::random_query(&mut rng, vocab);
            let band = FilterBand::ALL[rng.random_range(0..4)];
            let k = rng.random_range(1..=n + 5);
            let got = idx.search(&q, band, k);
            let want = common::exhaustive_search(&docs, &tok, &q, band, k, 1.2, 0.75);
            let got_ids: Vec<&str> = got.iter().map(|h| h.doc_id.as_str()).collect();
            let want_ids: Vec<&str> = want.iter().map(|h| h.doc_id.as_str()).collect();
            assert_eq!(got_ids, want_ids, "query {q:?} band {band}");
            for (g, w) in got.iter().zip(&want) {
                assert!((g.score - w.score).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn bands_nest_and_keep_scores() {
    let mut rng = common::rng(5);
    let docs = common::random_corpus(&mut rng, 300, 80);
    let idx = build_index(&docs, Bm25Params::default()).unwrap();
    for _ in 0..30 {
        let q = common::random_query(&mut rng, 80);
        let runs: Vec<_> = FilterBand::ALL.iter().map(|b| idx.search(&q, *b, docs.len())).collect();
        for w in runs.windows(2) {
            let wider: HashSet<&str> = w[0].iter().map(|h| h.doc_id.as_str()).collect();
            assert!(w[1].iter().all(|h| wider.contains(h.doc_id.as_str())));
            for h in &w[1] {
                let same = w[0].iter().find(|x| x.doc_id == h.doc_id).unwrap();
                assert_eq!(same.score, h.score);
            }
        }
    }
}

#[test]
fn saved_index_answers_identically() {
    let c = medline_like(&MedlineParams { n_docs: 300, n_topics: 5, docs_per_topic: 20, ..Default::default() });
    let idx = build_index(&c.docs, Bm25Params::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synthetic.idx");
    save_index(&idx, &path).unwrap();
    let back = load_index(&path).unwrap();
    for q in c.topics.values() {
        for band in FilterBand::ALL {
            assert_eq!(idx.search(q, band, 50), back.search(q, band, 50));
        }
    }
}
