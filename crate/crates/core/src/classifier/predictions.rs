//! JSON-lines prediction files produced by out-of-process models.
//!
//! Each line carries `doc_id` plus exactly one of:
//! `confidences` (all seven levels, each in `[0, 1]`), `raw` (a regression
//! output) or `loe` (a bare label, read as full confidence in that level).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use super::{Prediction, RegressionPrediction};
use crate::error::{Error, Result};
use crate::label::{ClassScores, LoeLabel};

#[derive(Debug, Clone, PartialEq)]
pub enum ExternalPrediction {
    Class(Prediction),
    Regression(RegressionPrediction),
}

impl ExternalPrediction {
    pub fn doc_id(&self) -> &str {
        match self {
            ExternalPrediction::Class(p) => &p.doc_id,
            ExternalPrediction::Regression(r) => &r.doc_id,
        }
    }
}

fn finite(value: &Value, what: &str) -> std::result::Result<f64, String> {
    match value.as_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{what} is not a finite number")),
    }
}

fn parse_record(obj: &Map<String, Value>, source: &str) -> std::result::Result<ExternalPrediction, String> {
    let doc_id = match obj.get("doc_id") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(_) => return Err("doc_id must be a non-empty string".into()),
        None => return Err("missing doc_id".into()),
    };
    let source = match obj.get("source") {
        Some(Value::String(s)) => s.clone(),
        _ => source.to_string(),
    };
    let present: Vec<&str> = ["confidences", "raw", "loe"]
        .into_iter()
        .filter(|k| obj.contains_key(*k))
        .collect();
    match present.as_slice() {
        ["confidences"] | ["confidences", "loe"] => {
            let Some(Value::Object(map)) = obj.get("confidences") else {
                return Err("confidences must be an object".into());
            };
            let mut pairs = Vec::with_capacity(map.len());
            for (band, v) in map {
                band.parse::<LoeLabel>().map_err(|_| format!("unknown band {band:?}"))?;
                let v = finite(v, &format!("confidence for {band}"))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("confidence for {band} outside [0, 1]"));
                }
                pairs.push((band.as_str(), v));
            }
            let scores = ClassScores::from_named(pairs).map_err(|e| e.to_string())?;
            Ok(ExternalPrediction::Class(Prediction::new(doc_id, scores, source)))
        }
        ["raw"] => {
            let raw = finite(&obj["raw"], "raw")?;
            Ok(ExternalPrediction::Regression(RegressionPrediction { doc_id, raw }))
        }
        ["loe"] => {
            let label = obj["loe"]
                .as_str()
                .ok_or("loe must be a string")?
                .parse::<LoeLabel>()
                .map_err(|e| e.to_string())?;
            Ok(ExternalPrediction::Class(Prediction::new(
                doc_id,
                ClassScores::one_hot(label),
                source,
            )))
        }
        [] => Err("record needs confidences, raw or loe".into()),
        _ => Err(format!("conflicting fields {}", present.join(", "))),
    }
}

/// Reads predictions; `source` names the producing model when records do
/// not carry their own.
pub fn read_predictions<R: BufRead>(reader: R, source: &str) -> Result<Vec<ExternalPrediction>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::record(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::record(lineno, e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(Error::record(lineno, "expected a JSON object"));
        };
        let p = parse_record(&obj, source).map_err(|m| Error::record(lineno, m))?;
        if !seen.insert(p.doc_id().to_string()) {
            return Err(Error::DuplicateId {
                doc_id: p.doc_id().to_string(),
                line: lineno,
            });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn import_external_predictions(path: impl AsRef<Path>) -> Result<Vec<ExternalPrediction>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_predictions(BufReader::new(file), &source)
}

pub fn write_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in predictions {
        serde_json::to_writer(&mut w, p)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
