//! Inverted index with per-document evidence levels and band-filtered BM25.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::label::LoeLabel;
use crate::textproc::{TermSequence, Tokenizer};

mod io;

pub use io::{load_index, save_index, INDEX_MAGIC};

/// Minimum-evidence filter applied before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum FilterBand {
    #[default]
    All,
    LoE3plus,
    LoE2plus,
    LoE1,
}

impl FilterBand {
    pub const ALL: [FilterBand; 4] = [
        FilterBand::All,
        FilterBand::LoE3plus,
        FilterBand::LoE2plus,
        FilterBand::LoE1,
    ];

    /// Largest admitted ordinal.
    pub fn weakest_admitted(self) -> usize {
        match self {
            FilterBand::All => 6,
            FilterBand::LoE3plus => 5,
            FilterBand::LoE2plus => 3,
            FilterBand::LoE1 => 1,
        }
    }

    pub fn admits(self, label: LoeLabel) -> bool {
        label.ordinal() <= self.weakest_admitted()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FilterBand::All => "All",
            FilterBand::LoE3plus => "LoE3+",
            FilterBand::LoE2plus => "LoE2+",
            FilterBand::LoE1 => "LoE1",
        }
    }
}

pub fn band_filter(label: LoeLabel, band: FilterBand) -> bool {
    band.admits(label)
}

impl fmt::Display for FilterBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for FilterBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let band = match s.trim().to_ascii_lowercase().as_str() {
            "all" => FilterBand::All,
            "loe3+" | "loe3plus" | "loe3" => FilterBand::LoE3plus,
            "loe2+" | "loe2plus" | "loe2" => FilterBand::LoE2plus,
            "loe1" => FilterBand::LoE1,
            _ => return Err(Error::InvalidBand(s.to_string())),
        };
        Ok(band)
    }
}

impl Serialize for FilterBand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for FilterBand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidArgument(format!(
                "BM25 parameters out of range: k1 = {}, b = {}",
                self.k1, self.b
            )));
        }
        Ok(())
    }
}

/// Stored per-document display fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEntry {
    pub doc_id: String,
    pub title: String,
    pub snippet: String,
    pub loe: LoeLabel,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub title: String,
    pub snippet: String,
    pub score: f64,
    pub loe: LoeLabel,
}

const SNIPPET_CHARS: usize = 240;

fn snippet(text: &str) -> String {
    if text.chars().count() <= SNIPPET_CHARS {
        return text.to_string();
    }
    let cut: String = text.chars().take(SNIPPET_CHARS).collect();
    let end = cut.rfind(' ').unwrap_or(cut.len());
    format!("{}...", cut[..end].trim_end())
}

/// Immutable after build. Internal document ids follow ascending doc_id,
/// so ranking ties on internal id equal ties on doc_id.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    params: Bm25Params,
    tokenizer: Tokenizer,
    docs: Vec<DocEntry>,
    avg_doc_length: f64,
    /// Vocabulary, lexicographic.
    terms: Vec<String>,
    /// Per term: (internal doc id, term frequency), ids strictly increasing.
    postings: Vec<Vec<(u32, u32)>>,
    term_index: HashMap<String, usize>,
}

impl Index {
    fn assemble(
        params: Bm25Params,
        tokenizer: Tokenizer,
        docs: Vec<DocEntry>,
        terms: Vec<String>,
        postings: Vec<Vec<(u32, u32)>>,
    ) -> Self {
        let total: u64 = docs.iter().map(|d| d.length as u64).sum();
        let avg_doc_length = if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 };
        let term_index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Index {
            params,
            tokenizer,
            docs,
            avg_doc_length,
            terms,
            postings,
            term_index,
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    pub fn internal_id(&self, doc_id: &str) -> Option<usize> {
        self.docs.binary_search_by(|d| d.doc_id.as_str().cmp(doc_id)).ok()
    }

    pub fn postings(&self, term: &str) -> &[(u32, u32)] {
        self.term_index.get(term).map_or(&[], |&i| &self.postings[i])
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.document_frequency(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// Fraction of the collection a band admits.
    pub fn admitted_fraction(&self, band: FilterBand) -> f64 {
        if self.docs.is_empty() {
            return 0.0;
        }
        self.docs.iter().filter(|d| band.admits(d.loe)).count() as f64 / self.docs.len() as f64
    }

    fn term_weight(&self, idf: f64, tf: u32, doc: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let len = self.docs[doc].length as f64;
        let norm = if self.avg_doc_length > 0.0 { len / self.avg_doc_length } else { 0.0 };
        idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
    }

    /// BM25 of one document; each distinct query unigram counts once.
    pub fn bm25_score(&self, query: &TermSequence, doc: usize) -> f64 {
        let mut score = 0.0;
        for term in distinct_unigrams(query) {
            let postings = self.postings(term);
            if let Ok(pos) = postings.binary_search_by_key(&(doc as u32), |p| p.0) {
                score += self.term_weight(self.idf(term), postings[pos].1, doc);
            }
        }
        score
    }

    /// Top-`k` admitted documents with positive score, by descending score
    /// then ascending doc_id.
    pub fn search_terms(&self, query: &TermSequence, band: FilterBand, k: usize) -> Vec<SearchHit> {
        let mut scores = vec![0.0f64; self.docs.len()];
        let mut touched = Vec::new();
        for term in distinct_unigrams(query) {
            let idf = self.idf(term);
            for &(doc, tf) in self.postings(term) {
                let d = doc as usize;
                if !band.admits(self.docs[d].loe) {
                    continue;
                }
                if scores[d] == 0.0 {
                    touched.push(d);
                }
                scores[d] += self.term_weight(idf, tf, d);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut ranked: Vec<(usize, f64)> = touched
            .into_iter()
            .map(|d| (d, scores[d]))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k, order);
            ranked.truncate(k);
        }
        ranked.sort_by(order);
        ranked
            .into_iter()
            .map(|(d, score)| {
                let e = &self.docs[d];
                SearchHit {
                    doc_id: e.doc_id.clone(),
                    title: e.title.clone(),
                    snippet: e.snippet.clone(),
                    score,
                    loe: e.loe,
                }
            })
            .collect()
    }

    pub fn search(&self, query: &str, band: FilterBand, k: usize) -> Vec<SearchHit> {
        self.search_terms(&self.tokenizer.tokenize(query), band, k)
    }
}

fn distinct_unigrams(query: &TermSequence) -> Vec<&str> {
    let mut seen = std::collections::HashSet::new();
    query
        .unigrams()
        .iter()
        .map(String::as_str)
        .filter(|t| seen.insert(*t))
        .collect()
}

/// Indexes title and abstract unigrams. Every document needs an assigned
/// level; duplicate ids are rejected.
pub fn build_index(docs: &[Document], params: Bm25Params) -> Result<Index> {
    build_index_with_tokenizer(docs, params, Tokenizer::default())
}

pub fn build_index_with_tokenizer(docs: &[Document], params: Bm25Params, tokenizer: Tokenizer) -> Result<Index> {
    params.validate()?;
    if docs.is_empty() {
        return Err(Error::Empty("document collection"));
    }
    let mut order: Vec<&Document> = docs.iter().collect();
    order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for w in order.windows(2) {
        if w[0].doc_id == w[1].doc_id {
            return Err(Error::DuplicateId {
                doc_id: w[0].doc_id.clone(),
                line: 0,
            });
        }
    }
    let mut entries = Vec::with_capacity(order.len());
    let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    for (internal, doc) in order.iter().enumerate() {
        let loe = doc
            .assigned_loe
            .ok_or_else(|| Error::MissingLoe(doc.doc_id.clone()))?;
        let unigrams = tokenizer.unigrams(&doc.text());
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in &unigrams {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        for (term, n) in tf {
            postings.entry(term.to_string()).or_default().push((internal as u32, n));
        }
        entries.push(DocEntry {
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            snippet: snippet(&doc.abstract_text),
            loe,
            length: unigrams.len() as u32,
        });
    }
    let (terms, lists): (Vec<String>, Vec<Vec<(u32, u32)>>) = postings.into_iter().unzip();
    Ok(Index::assemble(params, tokenizer, entries, terms, lists))
}
