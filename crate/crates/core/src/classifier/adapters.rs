//! Maps regression and multi-label model outputs onto a single level.

use crate::error::{Error, Result};
use crate::label::{ClassScores, LoeLabel};

pub const DEFAULT_MULTILABEL_THRESHOLD: f64 = 0.5;

/// Rounds half away from zero, clamps to the ordinal range.
pub fn regression_to_label(raw: f64) -> Result<LoeLabel> {
    if !raw.is_finite() {
        return Err(Error::NonFinite(format!("regression output {raw}")));
    }
    let ordinal = raw.round().clamp(0.0, 6.0) as usize;
    Ok(LoeLabel::ALL[ordinal])
}

/// Highest-scoring level among those at or above `threshold`; the global
/// argmax when none is.
pub fn multilabel_to_label(scores: &ClassScores, threshold: f64) -> LoeLabel {
    let mut best: Option<(LoeLabel, f64)> = None;
    for (label, score) in scores.iter() {
        if score >= threshold && best.is_none_or(|(_, b)| score > b) {
            best = Some((label, score));
        }
    }
    best.map_or_else(|| scores.argmax(), |(l, _)| l)
}
