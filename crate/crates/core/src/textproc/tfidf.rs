use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::TermSequence;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_DF: u32 = 2;

/// Sparse feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts by index and sums duplicates; zero weights are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, w) in pairs {
            *merged.entry(i).or_insert(0.0) += w;
        }
        SparseVector {
            entries: merged.into_iter().filter(|(_, w)| *w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Keeps only `selected` features, renumbered by their position in
    /// `selected` (which must be sorted ascending).
    pub fn project(&self, selected: &[usize]) -> SparseVector {
        let entries = self
            .entries
            .iter()
            .filter_map(|&(i, w)| selected.binary_search(&i).ok().map(|pos| (pos, w)))
            .collect();
        SparseVector { entries }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut dense = vec![0.0; dim];
        for &(i, w) in &self.entries {
            if i < dim {
                dense[i] = w;
            }
        }
        dense
    }
}

/// Vocabulary and document frequencies of a fitted corpus.
///
/// Weights are `tf * (ln((1 + n_docs) / (1 + df)) + 1)`, L2-normalized per
/// document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Vocabulary terms in feature-index order (lexicographic).
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_docs: usize,
    min_df: u32,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfModel {
    fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    /// Restores the lookup table after deserialization.
    pub(crate) fn finish_load(&mut self) {
        self.rebuild_index();
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn min_df(&self) -> u32 {
        self.min_df
    }

    pub fn feature_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn document_frequency(&self, term: &str) -> Option<u32> {
        self.feature_index(term).map(|i| self.document_frequency[i])
    }

    pub fn idf(&self, index: usize) -> f64 {
        let df = self.document_frequency[index] as f64;
        ((1.0 + self.n_docs as f64) / (1.0 + df)).ln() + 1.0
    }

    pub fn vectorize(&self, doc: &TermSequence) -> SparseVector {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for term in doc.terms() {
            if let Some(i) = self.feature_index(term) {
                *tf.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let weighted: Vec<(usize, f64)> = tf.into_iter().map(|(i, n)| (i, n * self.idf(i))).collect();
        let norm = weighted.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return SparseVector::default();
        }
        SparseVector {
            entries: weighted.into_iter().map(|(i, w)| (i, w / norm)).collect(),
        }
    }
}

/// Fits vocabulary and document frequencies. Terms occurring in fewer than
/// `min_df` documents are left out.
pub fn fit_tfidf(docs: &[TermSequence], min_df: u32) -> Result<TfidfModel> {
    if docs.iter().all(TermSequence::is_empty) {
        return Err(Error::Empty("tf-idf corpus has no terms"));
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in docs {
        for term in doc.distinct() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let (terms, document_frequency): (Vec<String>, Vec<u32>) = df
        .into_iter()
        .filter(|(_, n)| *n >= min_df.max(1))
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    let mut model = TfidfModel {
        terms,
        document_frequency,
        n_docs: docs.len(),
        min_df,
        index: HashMap::new(),
    };
    model.rebuild_index();
    Ok(model)
}
