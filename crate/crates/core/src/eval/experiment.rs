//! Band-filtered retrieval experiment over a topic set.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{condensed_ndcg, ndcg_at_k, p_at_10, r_prec};
use super::stats::{bonferroni, paired_t_test};
use super::trec::{Qrels, Run, RunEntry};
use crate::error::{Error, Result};
use crate::index::{FilterBand, Index};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Cutoff for NDCG.
    pub k: usize,
    /// Retrieval depth for P@10, R-Prec and the condensed NDCG.
    pub depth: usize,
    pub log_base: f64,
    pub alpha: f64,
    /// Comparisons for the Bonferroni correction; defaults to the number of
    /// filtered bands.
    pub comparisons: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 10,
            depth: 1000,
            log_base: 2.0,
            alpha: 0.05,
            comparisons: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub ndcg: f64,
    pub p_at_10: f64,
    pub r_prec: f64,
    /// NDCG over the judged-only (condensed) ranking.
    pub inf_ndcg_approx: f64,
}

impl MetricSet {
    fn minus(&self, other: &MetricSet) -> MetricSet {
        MetricSet {
            ndcg: self.ndcg - other.ndcg,
            p_at_10: self.p_at_10 - other.p_at_10,
            r_prec: self.r_prec - other.r_prec,
            inf_ndcg_approx: self.inf_ndcg_approx - other.inf_ndcg_approx,
        }
    }

    fn mean(items: &[MetricSet]) -> MetricSet {
        let n = items.len() as f64;
        let sum = |f: fn(&MetricSet) -> f64| items.iter().map(f).sum::<f64>() / n;
        MetricSet {
            ndcg: sum(|m| m.ndcg),
            p_at_10: sum(|m| m.p_at_10),
            r_prec: sum(|m| m.r_prec),
            inf_ndcg_approx: sum(|m| m.inf_ndcg_approx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    pub topic: String,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub t: f64,
    pub p: f64,
    pub df: usize,
    pub corrected_alpha: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    pub band: FilterBand,
    pub admitted_fraction: f64,
    pub mean: MetricSet,
    /// Mean of this band minus mean of the unfiltered band.
    pub delta: MetricSet,
    /// NDCG paired t-test against the unfiltered band.
    pub significance: Option<Significance>,
    pub per_topic: Vec<TopicScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub topic_set: String,
    pub config: ExperimentConfig,
    pub n_topics: usize,
    pub skipped_topics: Vec<String>,
    pub bands: Vec<BandResult>,
}

impl ExperimentReport {
    pub fn band(&self, band: FilterBand) -> Option<&BandResult> {
        self.bands.iter().find(|b| b.band == band)
    }
}

/// Scores one ranking against one topic's judgments.
pub fn score_ranking(
    ranking: &[&str],
    qrels: &super::metrics::TopicQrels,
    config: &ExperimentConfig,
) -> Option<MetricSet> {
    Some(MetricSet {
        ndcg: ndcg_at_k(ranking, qrels, config.k, config.log_base)?,
        p_at_10: p_at_10(ranking, qrels),
        r_prec: r_prec(ranking, qrels)?,
        inf_ndcg_approx: condensed_ndcg(ranking, qrels, config.k, config.log_base)?,
    })
}

/// Runs every topic under every band. The unfiltered band is always
/// evaluated so deltas have a reference. Topics without judgments or
/// without any relevant document are skipped.
pub fn run_experiment(
    index: &Index,
    topic_set: &str,
    topics: &BTreeMap<String, String>,
    qrels: &Qrels,
    bands: &[FilterBand],
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if config.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut bands: Vec<FilterBand> = bands.to_vec();
    if !bands.contains(&FilterBand::All) {
        bands.insert(0, FilterBand::All);
    }
    bands.sort();
    bands.dedup();

    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for (id, query) in topics {
        match qrels.topic(id) {
            Some(q) if q.values().any(|g| *g >= 1) => scored.push((id, query, q)),
            Some(_) => {
                log::warn!("topic {id}: no relevant documents; excluded");
                skipped.push(id.clone());
            }
            None => {
                log::warn!("topic {id}: no judgments; excluded");
                skipped.push(id.clone());
            }
        }
    }
    if scored.is_empty() {
        return Err(Error::Empty("topics with relevant judgments"));
    }
    let depth = config.depth.max(config.k).max(10);
    let per_topic: Vec<Vec<MetricSet>> = scored
        .par_iter()
        .map(|(_, query, q)| {
            let terms = index.tokenizer().tokenize(query);
            bands
                .iter()
                .map(|&band| {
                    let hits = index.search_terms(&terms, band, depth);
                    let ranking: Vec<&str> = hits.iter().map(|h| h.doc_id.as_str()).collect();
                    score_ranking(&ranking, q, config).expect("topic has relevant documents")
                })
                .collect()
        })
        .collect();

    let column = |b: usize| -> Vec<MetricSet> { per_topic.iter().map(|row| row[b]).collect() };
    let all_pos = bands.iter().position(|b| *b == FilterBand::All).expect("All present");
    let baseline = column(all_pos);
    let baseline_mean = MetricSet::mean(&baseline);
    let m = config.comparisons.unwrap_or(bands.len() - 1).max(1);
    let corrected_alpha = bonferroni(config.alpha, m);

    let mut results = Vec::with_capacity(bands.len());
    for (b, &band) in bands.iter().enumerate() {
        let col = column(b);
        let mean = MetricSet::mean(&col);
        let significance = if band == FilterBand::All || col.len() < 2 {
            None
        } else {
            let x: Vec<f64> = col.iter().map(|s| s.ndcg).collect();
            let y: Vec<f64> = baseline.iter().map(|s| s.ndcg).collect();
            let t = paired_t_test(&x, &y)?;
            Some(Significance {
                t: t.t,
                p: t.p,
                df: t.df,
                corrected_alpha,
                significant: t.p < corrected_alpha,
            })
        };
        results.push(BandResult {
            band,
            admitted_fraction: index.admitted_fraction(band),
            mean,
            delta: mean.minus(&baseline_mean),
            significance,
            per_topic: scored
                .iter()
                .zip(&col)
                .map(|((id, _, _), m)| TopicScore {
                    topic: (*id).clone(),
                    metrics: *m,
                })
                .collect(),
        });
    }
    Ok(ExperimentReport {
        topic_set: topic_set.to_string(),
        config: config.clone(),
        n_topics: scored.len(),
        skipped_topics: skipped,
        bands: results,
    })
}

/// One run per band, in TREC form.
pub fn band_runs(
    index: &Index,
    topics: &BTreeMap<String, String>,
    bands: &[FilterBand],
    depth: usize,
) -> Vec<(FilterBand, Run)> {
    bands
        .iter()
        .map(|&band| {
            let mut run = Run::new(format!("bm25-{}", band.as_str().to_ascii_lowercase().replace('+', "plus")));
            for (id, query) in topics {
                let hits = index.search(query, band, depth);
                run.topics.insert(
                    id.clone(),
                    hits.into_iter()
                        .map(|h| RunEntry {
                            doc_id: h.doc_id,
                            score: h.score,
                        })
                        .collect(),
                );
            }
            (band, run)
        })
        .collect()
}
