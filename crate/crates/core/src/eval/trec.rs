//! TREC qrels, run and topic files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::metrics::TopicQrels;
use crate::error::{Error, Result};

/// topic -> doc_id -> grade (0, 1 or 2).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qrels {
    pub topics: BTreeMap<String, TopicQrels>,
}

impl Qrels {
    pub fn grade(&self, topic: &str, doc_id: &str) -> Option<u8> {
        self.topics.get(topic)?.get(doc_id).copied()
    }

    pub fn topic(&self, topic: &str) -> Option<&TopicQrels> {
        self.topics.get(topic)
    }
}

pub fn parse_qrels(text: &str) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [topic, _, doc, grade] = fields[..] else {
            return Err(Error::record(lineno, "expected 4 fields: topic iter doc grade"));
        };
        let grade: i64 = grade
            .parse()
            .map_err(|_| Error::record(lineno, format!("grade {grade:?} is not an integer")))?;
        if !(0..=2).contains(&grade) {
            return Err(Error::record(lineno, format!("grade {grade} outside 0..=2")));
        }
        qrels
            .topics
            .entry(topic.to_string())
            .or_default()
            .insert(doc.to_string(), grade as u8);
    }
    Ok(qrels)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    parse_qrels(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
}

/// Ranked results per topic; scores non-increasing within a topic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Run {
    pub tag: String,
    pub topics: BTreeMap<String, Vec<RunEntry>>,
}

impl Run {
    pub fn new(tag: impl Into<String>) -> Self {
        Run {
            tag: tag.into(),
            topics: BTreeMap::new(),
        }
    }

    pub fn ranking(&self, topic: &str) -> Vec<&str> {
        self.topics
            .get(topic)
            .map(|v| v.iter().map(|e| e.doc_id.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (topic, entries) in &self.topics {
            for (rank, e) in entries.iter().enumerate() {
                let _ = writeln!(out, "{topic} Q0 {} {} {:.6} {}", e.doc_id, rank + 1, e.score, self.tag);
            }
        }
        out
    }
}

pub fn parse_run(text: &str) -> Result<Run> {
    let mut run = Run::default();
    let mut ranked: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    let mut seen: HashMap<String, HashSet<String>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [topic, _, doc, rank, score, tag] = fields[..] else {
            return Err(Error::record(lineno, "expected 6 fields: topic Q0 doc rank score tag"));
        };
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::record(lineno, format!("rank {rank:?} is not an integer")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::record(lineno, format!("score {score:?} is not a finite number")))?;
        if run.tag.is_empty() {
            run.tag = tag.to_string();
        }
        if !seen.entry(topic.to_string()).or_default().insert(doc.to_string()) {
            return Err(Error::DuplicateId {
                doc_id: format!("{topic}/{doc}"),
                line: lineno,
            });
        }
        ranked.entry(topic.to_string()).or_default().push((
            rank,
            RunEntry {
                doc_id: doc.to_string(),
                score,
            },
        ));
    }
    for (topic, mut entries) in ranked {
        entries.sort_by_key(|(rank, _)| *rank);
        let consistent = entries.windows(2).all(|w| w[0].1.score >= w[1].1.score);
        if !consistent {
            log::warn!("run topic {topic}: ranks disagree with scores; reordering by score");
            entries.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.1.doc_id.cmp(&b.1.doc_id)));
        }
        run.topics.insert(topic, entries.into_iter().map(|(_, e)| e).collect());
    }
    Ok(run)
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Run> {
    let path = path.as_ref();
    parse_run(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_run(run: &Run, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, run.to_trec_string()).map_err(|e| Error::io(path, e))
}

static TOPIC_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?s)<topic\s+number\s*=\s*"([^"]+)"[^>]*>(.*?)</topic>"#).expect("valid regex"));
static FIELD_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)<(disease|gene)>(.*?)</(?:disease|gene)>").expect("valid regex"));

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

/// Topic id -> query text. Accepts tab-separated `id<TAB>query` lines or
/// TREC Precision Medicine XML, where disease and gene fields are joined and
/// demographics left out.
pub fn parse_topics(text: &str) -> Result<BTreeMap<String, String>> {
    let mut topics = BTreeMap::new();
    if text.trim_start().starts_with('<') {
        for cap in TOPIC_RE.captures_iter(text) {
            let parts: Vec<String> = FIELD_RE
                .captures_iter(&cap[2])
                .map(|f| unescape(f[2].trim()))
                .filter(|s| !s.is_empty())
                .collect();
            topics.insert(cap[1].trim().to_string(), parts.join(" "));
        }
        if topics.is_empty() {
            return Err(Error::InvalidArgument("no <topic> elements found".into()));
        }
        return Ok(topics);
    }
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, query)) = line.split_once('\t') else {
            return Err(Error::record(i + 1, "expected id<TAB>query"));
        };
        if topics.insert(id.trim().to_string(), query.trim().to_string()).is_some() {
            return Err(Error::DuplicateId {
                doc_id: id.trim().to_string(),
                line: i + 1,
            });
        }
    }
    Ok(topics)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    parse_topics(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
