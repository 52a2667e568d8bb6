//! Majority voting over several models' predictions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::adapters::regression_to_label;
use super::predictions::ExternalPrediction;
use crate::error::{Error, Result};
use crate::label::{LoeLabel, NUM_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    pub label: LoeLabel,
    pub confidence: f64,
}

impl Vote {
    pub fn new(label: LoeLabel, confidence: f64) -> Self {
        Vote { label, confidence }
    }
}

/// Most frequent level; ties go to the level holding the single most
/// confident vote, then to the lower ordinal.
pub fn majority_vote(votes: &[Vote]) -> Result<LoeLabel> {
    if votes.is_empty() {
        return Err(Error::Empty("vote list"));
    }
    let mut count = [0usize; NUM_LEVELS];
    let mut top = [f64::NEG_INFINITY; NUM_LEVELS];
    for v in votes {
        let i = v.label.ordinal();
        count[i] += 1;
        if v.confidence > top[i] {
            top[i] = v.confidence;
        }
    }
    let mut best = 0;
    for i in 1..NUM_LEVELS {
        let better = count[i] > count[best] || (count[i] == count[best] && top[i] > top[best]);
        if better {
            best = i;
        }
    }
    Ok(LoeLabel::ALL[best])
}

impl ExternalPrediction {
    /// The member's label and how sure it is. Regression outputs are
    /// surer the closer they sit to an integer.
    pub fn to_vote(&self) -> Result<Vote> {
        match self {
            ExternalPrediction::Class(p) => Ok(Vote::new(p.chosen, p.confidences.get(p.chosen))),
            ExternalPrediction::Regression(r) => {
                let label = regression_to_label(r.raw)?;
                let distance = (r.raw - label.ordinal() as f64).abs();
                Ok(Vote::new(label, (1.0 - 2.0 * distance).max(0.0)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDecision {
    pub doc_id: String,
    pub loe: LoeLabel,
    /// Votes received per level.
    pub votes: BTreeMap<LoeLabel, usize>,
}

/// Votes across prediction sets, one decision per document id that any
/// member predicted, in doc_id order.
pub fn ensemble(members: &[Vec<ExternalPrediction>]) -> Result<Vec<EnsembleDecision>> {
    if members.is_empty() {
        return Err(Error::Empty("ensemble members"));
    }
    let mut by_doc: BTreeMap<&str, Vec<Vote>> = BTreeMap::new();
    for member in members {
        for p in member {
            by_doc.entry(p.doc_id()).or_default().push(p.to_vote()?);
        }
    }
    by_doc
        .into_iter()
        .map(|(doc_id, votes)| {
            let mut tally = BTreeMap::new();
            for v in &votes {
                *tally.entry(v.label).or_insert(0) += 1;
            }
            Ok(EnsembleDecision {
                doc_id: doc_id.to_string(),
                loe: majority_vote(&votes)?,
                votes: tally,
            })
        })
        .collect()
}
