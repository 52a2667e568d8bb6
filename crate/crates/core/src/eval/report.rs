//! Plain-text, CSV and JSON renderings of evaluation results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::experiment::ExperimentReport;
use super::metrics::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::index::FilterBand;
use crate::label::LoeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown output format {s:?}"))),
        }
    }
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn bands_of(reports: &[ExperimentReport]) -> Vec<FilterBand> {
    let mut bands: Vec<FilterBand> = reports.iter().flat_map(|r| r.bands.iter().map(|b| b.band)).collect();
    bands.sort();
    bands.dedup();
    bands
}

fn percent(f: f64) -> String {
    format!("{:.0}%", f * 100.0)
}

/// NDCG@k per band (rows) and topic set (columns), with the delta against
/// the unfiltered band in parentheses.
pub fn ndcg_table(reports: &[ExperimentReport]) -> String {
    let mut rows = vec![{
        let mut h = vec!["Band".to_string(), "size".to_string()];
        h.extend(reports.iter().map(|r| r.topic_set.clone()));
        h
    }];
    for band in bands_of(reports) {
        let size = reports
            .iter()
            .find_map(|r| r.band(band))
            .map_or(String::new(), |b| percent(b.admitted_fraction));
        let mut row = vec![band.to_string(), size];
        for r in reports {
            row.push(match r.band(band) {
                Some(b) if band == FilterBand::All => format!("{:.2}", b.mean.ndcg),
                Some(b) => format!("{:.2} ({:.2})", b.mean.ndcg, b.delta.ndcg),
                None => "-".into(),
            });
        }
        rows.push(row);
    }
    align(&rows)
}

/// `infNDCG-approx / R-Prec / P@10` per band and topic set.
pub fn official_table(reports: &[ExperimentReport]) -> String {
    let mut rows = vec![{
        let mut h = vec!["Band".to_string()];
        h.extend(reports.iter().map(|r| format!("{} infNDCG-approx / R-Prec / P@10", r.topic_set)));
        h
    }];
    for band in bands_of(reports) {
        let mut row = vec![band.to_string()];
        for r in reports {
            row.push(match r.band(band) {
                Some(b) => format!(
                    "{:.2} / {:.2} / {:.2}",
                    b.mean.inf_ndcg_approx, b.mean.r_prec, b.mean.p_at_10
                ),
                None => "-".into(),
            });
        }
        rows.push(row);
    }
    align(&rows)
}

pub fn significance_lines(reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    for r in reports {
        for b in &r.bands {
            if let Some(s) = &b.significance {
                let _ = writeln!(
                    out,
                    "{} {}: t = {:.4}, df = {}, p = {:.4} (alpha {:.4}){}",
                    r.topic_set,
                    b.band,
                    s.t,
                    s.df,
                    s.p,
                    s.corrected_alpha,
                    if s.significant { " *" } else { "" }
                );
            }
        }
    }
    out
}

/// Per-topic scores, one line per (topic set, band, topic).
pub fn per_topic_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("topic_set,band,topic,ndcg,p_at_10,r_prec,inf_ndcg_approx\n");
    for r in reports {
        for b in &r.bands {
            for t in &b.per_topic {
                let m = t.metrics;
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{:.6},{:.6},{:.6}",
                    r.topic_set, b.band, t.topic, m.ndcg, m.p_at_10, m.r_prec, m.inf_ndcg_approx
                );
            }
        }
    }
    out
}

pub fn render_experiment(reports: &[ExperimentReport], format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Text => {
            let k = reports.first().map_or(10, |r| r.config.k);
            format!(
                "NDCG@{k}\n{}\n{}\n{}",
                ndcg_table(reports),
                official_table(reports),
                significance_lines(reports)
            )
        }
        OutputFormat::Json => serde_json::to_string_pretty(reports)? + "\n",
        OutputFormat::Csv => per_topic_csv(reports),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: String,
    pub f1: f64,
    pub rmse: f64,
}

pub fn model_table(rows: &[ModelRow]) -> String {
    let mut table = vec![vec!["Model".to_string(), "F1".to_string(), "RMSE".to_string()]];
    for r in rows {
        table.push(vec![r.model.clone(), format!("{:.2}", r.f1), format!("{:.2}", r.rmse)]);
    }
    align(&table)
}

pub fn model_csv(rows: &[ModelRow]) -> String {
    let mut out = String::from("model,f1,rmse\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.6},{:.6}", r.model, r.f1, r.rmse);
    }
    out
}

/// Rows are true levels, columns predicted.
pub fn confusion_table(m: &ConfusionMatrix) -> String {
    let mut rows = vec![{
        let mut h = vec!["true\\pred".to_string()];
        h.extend(LoeLabel::ALL.iter().map(|l| l.to_string()));
        h
    }];
    for t in LoeLabel::ALL {
        let mut row = vec![t.to_string()];
        row.extend(LoeLabel::ALL.iter().map(|p| m.get(t, *p).to_string()));
        rows.push(row);
    }
    align(&rows)
}

/// Top terms per level side by side: a `term score` column pair per level,
/// one row per rank.
pub fn term_table(terms: &BTreeMap<LoeLabel, Vec<(String, f64)>>) -> String {
    let levels: Vec<LoeLabel> = LoeLabel::ALL.into_iter().filter(|l| terms.contains_key(l)).collect();
    let depth = levels.iter().map(|l| terms[l].len()).max().unwrap_or(0);
    let mut rows = vec![
        levels.iter().flat_map(|l| [l.to_string(), String::new()]).collect::<Vec<_>>(),
        levels.iter().flat_map(|_| ["term".to_string(), "score".to_string()]).collect(),
    ];
    for r in 0..depth {
        rows.push(
            levels
                .iter()
                .flat_map(|l| match terms[l].get(r) {
                    Some((t, s)) => [t.clone(), format!("{s:.2}")],
                    None => [String::new(), String::new()],
                })
                .collect(),
        );
    }
    align(&rows)
}

/// Count and share per level, all seven levels listed.
pub fn distribution_table(labels: &[LoeLabel]) -> String {
    let mut counts = [0usize; 7];
    for l in labels {
        counts[l.ordinal()] += 1;
    }
    let n = labels.len().max(1) as f64;
    let mut rows = vec![vec!["Level".to_string(), "count".to_string(), "share".to_string()]];
    for l in LoeLabel::ALL {
        let c = counts[l.ordinal()];
        rows.push(vec![l.to_string(), c.to_string(), percent(c as f64 / n)]);
    }
    align(&rows)
}
