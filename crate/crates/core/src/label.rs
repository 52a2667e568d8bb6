//! The seven-level evidence hierarchy.
//!
//! Levels are ordered from strongest (`1a`, systematic reviews of randomized
//! controlled trials) to weakest (`4`, case series). Each level carries an
//! integer ordinal in `0..=6`; a lower ordinal means stronger evidence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const NUM_LEVELS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoeLabel {
    /// Systematic reviews of RCTs.
    L1a,
    /// Individual RCTs.
    L1b,
    /// Systematic reviews of cohort studies.
    L2a,
    /// Individual cohort studies.
    L2b,
    /// Systematic reviews of case-control studies.
    L3a,
    /// Individual case-control studies.
    L3b,
    /// Case series.
    L4,
}

impl LoeLabel {
    /// All levels in ordinal order.
    pub const ALL: [LoeLabel; NUM_LEVELS] = [
        LoeLabel::L1a,
        LoeLabel::L1b,
        LoeLabel::L2a,
        LoeLabel::L2b,
        LoeLabel::L3a,
        LoeLabel::L3b,
        LoeLabel::L4,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Self> {
        Self::ALL.get(ordinal).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LoeLabel::L1a => "1a",
            LoeLabel::L1b => "1b",
            LoeLabel::L2a => "2a",
            LoeLabel::L2b => "2b",
            LoeLabel::L3a => "3a",
            LoeLabel::L3b => "3b",
            LoeLabel::L4 => "4",
        }
    }
}

impl fmt::Display for LoeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for LoeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label = match s.trim().to_ascii_lowercase().as_str() {
            "1a" => LoeLabel::L1a,
            "1b" => LoeLabel::L1b,
            "2a" => LoeLabel::L2a,
            "2b" => LoeLabel::L2b,
            "3a" => LoeLabel::L3a,
            "3b" => LoeLabel::L3b,
            "4" => LoeLabel::L4,
            _ => return Err(Error::InvalidLabel(s.to_string())),
        };
        Ok(label)
    }
}

/// Parses a case-insensitive level name such as `"1A"` or `"4"`.
pub fn parse_label(text: &str) -> Result<LoeLabel> {
    text.parse()
}

impl Serialize for LoeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LoeLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One score per level, indexed by ordinal. Serialized as a map keyed by
/// level name; deserialization requires all seven levels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassScores(pub [f64; NUM_LEVELS]);

impl Serialize for ClassScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(NUM_LEVELS))?;
        for (label, value) in self.iter() {
            map.serialize_entry(label.as_str(), &value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ClassScores {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<String, f64>::deserialize(deserializer)?;
        ClassScores::from_named(map.iter().map(|(k, v)| (k.as_str(), *v)))
            .map_err(serde::de::Error::custom)
    }
}

impl ClassScores {
    pub fn uniform(value: f64) -> Self {
        ClassScores([value; NUM_LEVELS])
    }

    pub fn one_hot(label: LoeLabel) -> Self {
        let mut scores = [0.0; NUM_LEVELS];
        scores[label.ordinal()] = 1.0;
        ClassScores(scores)
    }

    /// Builds scores from `(level name, value)` pairs covering each level
    /// exactly once.
    pub fn from_named<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut scores = [0.0; NUM_LEVELS];
        let mut seen = [false; NUM_LEVELS];
        for (name, value) in pairs {
            let label: LoeLabel = name.parse()?;
            if seen[label.ordinal()] {
                return Err(Error::InvalidArgument(format!("level {label} given twice")));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("score for {label}")));
            }
            seen[label.ordinal()] = true;
            scores[label.ordinal()] = value;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "missing score for level {}",
                LoeLabel::ALL[missing]
            )));
        }
        Ok(ClassScores(scores))
    }

    pub fn get(&self, label: LoeLabel) -> f64 {
        self.0[label.ordinal()]
    }

    pub fn set(&mut self, label: LoeLabel, value: f64) {
        self.0[label.ordinal()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (LoeLabel, f64)> + '_ {
        LoeLabel::ALL.iter().map(move |&l| (l, self.0[l.ordinal()]))
    }

    /// Highest-scoring level; ties resolve toward the lower ordinal.
    pub fn argmax(&self) -> LoeLabel {
        let mut best = 0;
        for i in 1..NUM_LEVELS {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        LoeLabel::ALL[best]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}
