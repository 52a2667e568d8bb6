//! Text to terms, terms to weighted sparse vectors, and chi-squared feature
//! selection.
//!
//! Tokenization: ASCII-fold, lowercase, split on anything that is not an
//! ASCII letter or digit, drop stopwords, Porter-stem, then append every
//! adjacent bigram of the stemmed stream. Stemming is applied until the
//! output is a fixed point and stems that collide with a stopword are
//! dropped, so re-tokenizing the joined unigrams reproduces them exactly.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod chi2;
pub mod stem;
pub mod tfidf;

pub use chi2::{chi2_select, chi2_statistic, Chi2Selection};
pub use stem::porter_stem;
pub use tfidf::{fit_tfidf, SparseVector, TfidfModel, DEFAULT_MIN_DF};

const DEFAULT_STOPWORDS: &str = include_str!("stopwords.txt");

static DEFAULT_TOKENIZER: LazyLock<Tokenizer> = LazyLock::new(Tokenizer::default);

/// Stemmed unigrams followed by the bigrams formed from adjacent unigrams.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TermSequence {
    terms: Vec<String>,
    n_unigrams: usize,
}

impl TermSequence {
    pub fn from_unigrams(unigrams: Vec<String>) -> Self {
        let n_unigrams = unigrams.len();
        let bigrams: Vec<String> = unigrams
            .windows(2)
            .map(|w| format!("{} {}", w[0], w[1]))
            .collect();
        let mut terms = unigrams;
        terms.extend(bigrams);
        TermSequence { terms, n_unigrams }
    }

    /// A bag of arbitrary terms with no positional structure.
    pub fn from_terms(terms: Vec<String>) -> Self {
        let n_unigrams = terms.iter().filter(|t| !t.contains(' ')).count();
        let (mut uni, bi): (Vec<_>, Vec<_>) = terms.into_iter().partition(|t| !t.contains(' '));
        uni.extend(bi);
        TermSequence {
            terms: uni,
            n_unigrams,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn unigrams(&self) -> &[String] {
        &self.terms[..self.n_unigrams]
    }

    pub fn bigrams(&self) -> &[String] {
        &self.terms[self.n_unigrams..]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Keeps the terms accepted by `keep`, preserving order and the
    /// unigram/bigram partition.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> TermSequence {
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut n_unigrams = 0;
        for (i, t) in self.terms.iter().enumerate() {
            if keep(t) {
                if i < self.n_unigrams {
                    n_unigrams += 1;
                }
                terms.push(t.clone());
            }
        }
        TermSequence { terms, n_unigrams }
    }

    /// Distinct terms in first-occurrence order.
    pub fn distinct(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.terms
            .iter()
            .filter(|t| seen.insert(t.as_str()))
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::from_stopwords(DEFAULT_STOPWORDS.lines())
    }
}

impl Tokenizer {
    pub fn from_stopwords<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let stopwords = words
            .into_iter()
            .map(|w| w.trim().to_ascii_lowercase())
            .filter(|w| !w.is_empty() && !w.starts_with('#'))
            .collect();
        Tokenizer { stopwords }
    }

    /// Plain-text stopword file, one word per line; `#` starts a comment line.
    pub fn from_stopword_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Tokenizer::from_stopwords(text.lines()))
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    fn stem(&self, word: &str) -> Option<String> {
        let mut current = porter_stem(word);
        for _ in 0..8 {
            let next = porter_stem(&current);
            if next == current {
                break;
            }
            current = next;
        }
        (!current.is_empty() && !self.is_stopword(&current)).then_some(current)
    }

    pub fn unigrams(&self, text: &str) -> Vec<String> {
        let folded = deunicode::deunicode(text).to_ascii_lowercase();
        folded
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|w| !w.is_empty() && !self.is_stopword(w))
            .filter_map(|w| self.stem(w))
            .collect()
    }

    pub fn tokenize(&self, text: &str) -> TermSequence {
        TermSequence::from_unigrams(self.unigrams(text))
    }
}

/// Tokenizes with the built-in stopword list.
pub fn tokenize(text: &str) -> TermSequence {
    DEFAULT_TOKENIZER.tokenize(text)
}

pub fn default_tokenizer() -> &'static Tokenizer {
    &DEFAULT_TOKENIZER
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn systematic_reviews_of_rcts() {
        let seq = tokenize("Systematic reviews of RCTs");
        assert_eq!(seq.unigrams(), strings(&["systemat", "review", "rct"]));
        assert_eq!(seq.bigrams(), strings(&["systemat review", "review rct"]));
    }

    #[test]
    fn hyphenated_compound() {
        let seq = tokenize("meta-analysis");
        assert_eq!(seq.terms(), strings(&["meta", "analysi", "meta analysi"]));
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  , of the ").is_empty());
    }

    #[test]
    fn folds_accents() {
        let seq = tokenize("Études naïve");
        assert_eq!(seq.unigrams(), strings(&["etud", "naiv"]));
    }

    #[test]
    fn custom_stopwords() {
        let tok = Tokenizer::from_stopwords(["# clinical", "patients", ""]);
        assert!(tok.is_stopword("patients"));
        assert!(!tok.is_stopword("# clinical"));
        assert_eq!(tok.unigrams("patients of a trial"), strings(&["of", "a", "trial"]));
    }

    #[test]
    fn term_bag_keeps_unigrams_first() {
        let seq = TermSequence::from_terms(strings(&["a b", "rct", "c d", "cohort"]));
        assert_eq!(seq.unigrams(), strings(&["rct", "cohort"]));
        assert_eq!(seq.bigrams(), strings(&["a b", "c d"]));
    }

    proptest! {
        #[test]
        fn unigram_output_is_a_fixed_point(text in "[A-Za-z ,.;()-]{0,200}") {
            let first = tokenize(&text);
            let again = tokenize(&first.unigrams().join(" "));
            prop_assert_eq!(first.unigrams(), again.unigrams());
            for t in first.unigrams() {
                prop_assert!(!t.contains(char::is_whitespace));
            }
            for b in first.bigrams() {
                prop_assert_eq!(b.matches(' ').count(), 1);
            }
        }

        #[test]
        fn words_from_real_vocabulary_are_fixed_points(
            words in proptest::collection::vec(proptest::sample::select(vec![
                "adverse", "agreed", "metastases", "analyses", "universal", "generalization",
                "randomized", "controlled", "trials", "patients", "survival", "cohort",
                "ones", "hers", "alls", "doing", "was", "this", "thesis", "previously",
            ]), 0..20)
        ) {
            let first = tokenize(&words.join(" "));
            let again = tokenize(&first.unigrams().join(" "));
            prop_assert_eq!(first.unigrams(), again.unigrams());
        }
    }
}
