//! Document collections, labeled datasets and stratified splitting.
//!
//! Collections are stored as JSON lines, one document per line:
//!
//! ```text
//! {"doc_id":"p1","title":"...","abstract":"...","loe":"1b"}
//! ```
//!
//! `loe` is the gold label and is optional for unlabeled collections. A
//! tagged collection may also carry `assigned_loe`, the label produced by a
//! classifier, which is what the search index filters on.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LoeLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, rename = "loe", skip_serializing_if = "Option::is_none")]
    pub gold_loe: Option<LoeLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assigned_loe: Option<LoeLabel>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, abstract_text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            gold_loe: None,
            assigned_loe: None,
        }
    }

    pub fn with_gold(mut self, label: LoeLabel) -> Self {
        self.gold_loe = Some(label);
        self
    }

    pub fn with_assigned(mut self, label: LoeLabel) -> Self {
        self.assigned_loe = Some(label);
        self
    }

    /// Title and abstract joined by a single space; this is the text that
    /// gets classified and indexed.
    pub fn text(&self) -> String {
        let mut text = String::with_capacity(self.title.len() + 1 + self.abstract_text.len());
        text.push_str(&self.title);
        text.push(' ');
        text.push_str(&self.abstract_text);
        text
    }
}

/// What to do with a line that does not parse as a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnMalformed {
    #[default]
    Abort,
    SkipAndWarn,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub on_malformed: OnMalformed,
}

/// An immutable collection of documents with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a collection, rejecting duplicate or empty ids.
    pub fn from_documents(docs: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if doc.doc_id.is_empty() {
                return Err(Error::record(i + 1, "empty doc_id"));
            }
            if by_id.insert(doc.doc_id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    doc_id: doc.doc_id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn into_docs(self) -> Vec<Document> {
        self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }
}

/// Result of loading a collection: the documents plus the lines that were
/// skipped under [`OnMalformed::SkipAndWarn`].
#[derive(Debug)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub skipped: Vec<(usize, String)>,
}

#[derive(Deserialize)]
struct RawRecord {
    doc_id: Option<String>,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    loe: Option<String>,
    #[serde(default)]
    assigned_loe: Option<String>,
}

fn parse_record(line: &str, lineno: usize) -> Result<Document> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| Error::record(lineno, e.to_string()))?;
    let doc_id = raw
        .doc_id
        .filter(|id| !id.is_empty())
        .ok_or_else(|| Error::record(lineno, "missing or empty doc_id"))?;
    let parse = |v: Option<String>| -> Result<Option<LoeLabel>> {
        v.map(|s| s.parse().map_err(|e: Error| Error::record(lineno, e.to_string())))
            .transpose()
    };
    Ok(Document {
        doc_id,
        title: raw.title,
        abstract_text: raw.abstract_text,
        gold_loe: parse(raw.loe)?,
        assigned_loe: parse(raw.assigned_loe)?,
    })
}

pub fn read_corpus<R: BufRead>(reader: R, options: LoadOptions) -> Result<LoadReport> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut skipped = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::record(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = match parse_record(&line, lineno) {
            Ok(doc) => doc,
            Err(e) => match options.on_malformed {
                OnMalformed::Abort => return Err(e),
                OnMalformed::SkipAndWarn => {
                    log::warn!("skipping malformed record: {e}");
                    skipped.push((lineno, e.to_string()));
                    continue;
                }
            },
        };
        if seen.insert(doc.doc_id.clone(), lineno).is_some() {
            return Err(Error::DuplicateId {
                doc_id: doc.doc_id,
                line: lineno,
            });
        }
        docs.push(doc);
    }
    log::info!("loaded {} documents ({} skipped)", docs.len(), skipped.len());
    Ok(LoadReport {
        corpus: Corpus::from_documents(docs)?,
        skipped,
    })
}

pub fn load_corpus(path: impl AsRef<Path>, options: LoadOptions) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), options)
}

pub fn write_corpus<'a>(path: impl AsRef<Path>, docs: impl IntoIterator<Item = &'a Document>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Documents paired with their gold level.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub items: Vec<(Document, LoeLabel)>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, items: Vec<(Document, LoeLabel)>) -> Self {
        LabeledDataset {
            name: name.into(),
            items,
        }
    }

    /// Every document must carry a gold label.
    pub fn from_corpus(name: impl Into<String>, corpus: &Corpus) -> Result<Self> {
        let items = corpus
            .docs()
            .iter()
            .map(|d| match d.gold_loe {
                Some(l) => Ok((d.clone(), l)),
                None => Err(Error::InvalidArgument(format!(
                    "document {:?} has no gold label",
                    d.doc_id
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset::new(name, items))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = LoeLabel> + '_ {
        self.items.iter().map(|(_, l)| *l)
    }

    pub fn class_counts(&self) -> [usize; 7] {
        let mut counts = [0; 7];
        for l in self.labels() {
            counts[l.ordinal()] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, valid, test };
        let parts = r.as_array();
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidArgument(format!("split ratios must be positive, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("split ratios must sum to 1, got {sum}")));
        }
        Ok(r)
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.valid, self.test]
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            valid: 0.2,
            test: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub valid: LabeledDataset,
    pub test: LabeledDataset,
}

// Guards against 10 * 0.6 = 5.999...
fn floor_eps(x: f64) -> usize {
    (x + 1e-9).floor() as usize
}

/// Largest-remainder apportionment of `n` items over `ratios`; ties in the
/// remainder go to the earlier split.
fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let mut out = [0; 3];
    let mut fracs = [(0.0, 0); 3];
    for i in 0..3 {
        let exact = n as f64 * ratios[i];
        out[i] = floor_eps(exact).min(n);
        fracs[i] = (exact - out[i] as f64, i);
    }
    let mut left = n - out.iter().sum::<usize>().min(n);
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in fracs.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Per-class allocation to (train, valid, test). Each cell is the floor or
/// ceiling of `class_count * ratio`, and the column totals hit the global
/// largest-remainder targets whenever that is feasible.
fn allocate(counts: &[usize; 7], ratios: &[f64; 3]) -> [[usize; 3]; 7] {
    let total: usize = counts.iter().sum();
    let targets = apportion(total, ratios);
    let mut alloc = [[0usize; 3]; 7];
    let mut leftover = [0usize; 7];
    let mut fracs: Vec<(f64, usize, usize)> = Vec::new();

    for c in 0..7 {
        let n = counts[c];
        if n == 0 {
            continue;
        }
        if n < 3 {
            log::warn!(
                "class {} has only {n} item(s); assigning to train first",
                LoeLabel::ALL[c]
            );
            for slot in alloc[c].iter_mut().take(n) {
                *slot = 1;
            }
            continue;
        }
        for i in 0..3 {
            let exact = n as f64 * ratios[i];
            alloc[c][i] = floor_eps(exact);
            fracs.push((exact - alloc[c][i] as f64, c, i));
        }
        leftover[c] = n - alloc[c].iter().sum::<usize>();
    }

    let mut deficit = [0isize; 3];
    for i in 0..3 {
        let used: usize = (0..7).map(|c| alloc[c][i]).sum();
        deficit[i] = targets[i] as isize - used as isize;
    }

    // Largest fractional part first; ties go train -> valid -> test.
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut bumped = [[false; 3]; 7];
    for &(_, c, i) in &fracs {
        if leftover[c] > 0 && deficit[i] > 0 {
            alloc[c][i] += 1;
            bumped[c][i] = true;
            leftover[c] -= 1;
            deficit[i] -= 1;
        }
    }
    while let Some(path) = augmenting_path(&leftover, &deficit, &bumped) {
        let (first, last) = (path[0], path[path.len() - 1]);
        leftover[first.0] -= 1;
        deficit[last.1] -= 1;
        for (step, &(c, i)) in path.iter().enumerate() {
            // Even steps add a unit to a cell, odd steps move one out of it.
            let add = step % 2 == 0;
            bumped[c][i] = add;
            if add {
                alloc[c][i] += 1;
            } else {
                alloc[c][i] -= 1;
            }
        }
    }
    // Infeasible column targets: place what remains without them.
    for &(_, c, i) in &fracs {
        if leftover[c] > 0 && !bumped[c][i] {
            alloc[c][i] += 1;
            bumped[c][i] = true;
            leftover[c] -= 1;
        }
    }
    alloc
}

/// Breadth-first search for a chain of (class, split) cell moves that places
/// one more leftover unit while meeting one more split deficit. A class
/// gives each split at most one extra unit.
fn augmenting_path(leftover: &[usize; 7], deficit: &[isize; 3], bumped: &[[bool; 3]; 7]) -> Option<Vec<(usize, usize)>> {
    if !deficit.iter().any(|d| *d > 0) {
        return None;
    }
    // parent of a split: the cell that reached it; parent of a class: the
    // cell that freed it.
    let mut split_from: [Option<(usize, usize)>; 3] = [None; 3];
    let mut class_from: [Option<Option<(usize, usize)>>; 7] = [None; 7];
    let mut queue = std::collections::VecDeque::new();
    for c in 0..7 {
        if leftover[c] > 0 {
            class_from[c] = Some(None);
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        for i in 0..3 {
            if bumped[c][i] || split_from[i].is_some() {
                continue;
            }
            split_from[i] = Some((c, i));
            if deficit[i] > 0 {
                let mut path = vec![(c, i)];
                let mut class = c;
                while let Some(Some(cell)) = class_from[class] {
                    path.push(cell);
                    let (_, split) = cell;
                    let reached = split_from[split].expect("visited split");
                    path.push(reached);
                    class = reached.0;
                }
                path.reverse();
                return Some(path);
            }
            for (c2, row) in bumped.iter().enumerate() {
                if row[i] && class_from[c2].is_none() {
                    class_from[c2] = Some(Some((c2, i)));
                    queue.push_back(c2);
                }
            }
        }
    }
    None
}

/// Splits a dataset into train / valid / test preserving class proportions.
///
/// Deterministic for a fixed seed. Within each split items keep their order
/// in the input dataset.
pub fn stratified_split(dataset: &LabeledDataset, ratios: SplitRatios, seed: u64) -> Result<Split> {
    let ratios = SplitRatios::new(ratios.train, ratios.valid, ratios.test)?.as_array();
    let counts = dataset.class_counts();
    let alloc = allocate(&counts, &ratios);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; dataset.len()];
    for label in LoeLabel::ALL {
        let c = label.ordinal();
        let mut members: Vec<usize> = dataset
            .items
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| *l == label)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        let mut it = members.into_iter();
        for split in 0..3 {
            for idx in it.by_ref().take(alloc[c][split]) {
                assignment[idx] = split;
            }
        }
    }

    let mut parts: [Vec<(Document, LoeLabel)>; 3] = Default::default();
    for (item, split) in dataset.items.iter().zip(assignment) {
        parts[split].push(item.clone());
    }
    let [train, valid, test] = parts;
    Ok(Split {
        train: LabeledDataset::new(format!("{}/train", dataset.name), train),
        valid: LabeledDataset::new(format!("{}/valid", dataset.name), valid),
        test: LabeledDataset::new(format!("{}/test", dataset.name), test),
    })
}

/// Fraction of items per level. Only levels that occur are present.
pub fn distribution_of(labels: impl IntoIterator<Item = LoeLabel>) -> Result<BTreeMap<LoeLabel, f64>> {
    let mut counts: BTreeMap<LoeLabel, usize> = BTreeMap::new();
    let mut total = 0usize;
    for l in labels {
        *counts.entry(l).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Empty("label distribution of an empty dataset"));
    }
    Ok(counts
        .into_iter()
        .map(|(l, n)| (l, n as f64 / total as f64))
        .collect())
}

pub fn label_distribution(dataset: &LabeledDataset) -> Result<BTreeMap<LoeLabel, f64>> {
    distribution_of(dataset.labels())
}

/// Reads gold labels as `doc_id label` pairs, one per line, separated by
/// whitespace. Blank lines and lines starting with `#` are ignored.
pub fn read_labels<R: BufRead>(reader: R) -> Result<BTreeMap<String, LoeLabel>> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::record(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(id), Some(label), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::record(lineno, "expected `doc_id label`"));
        };
        let label: LoeLabel = label.parse().map_err(|e: Error| Error::record(lineno, e.to_string()))?;
        if out.insert(id.to_string(), label).is_some() {
            return Err(Error::DuplicateId {
                doc_id: id.to_string(),
                line: lineno,
            });
        }
    }
    Ok(out)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, LoeLabel>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset_with_counts(counts: &[usize; 7]) -> LabeledDataset {
        let mut items = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for j in 0..n {
                let label = LoeLabel::ALL[c];
                items.push((Document::new(format!("d{c}_{j}"), "t", "a").with_gold(label), label));
            }
        }
        LabeledDataset::new("synthetic", items)
    }

    #[test]
    fn parses_documents_with_and_without_labels() {
        let input = "{\"doc_id\":\"p1\",\"title\":\"t\",\"abstract\":\"a\"}\n\n{\"doc_id\":\"p2\",\"title\":\"t\",\"abstract\":\"a\",\"loe\":\"1a\"}\n";
        let report = read_corpus(input.as_bytes(), LoadOptions::default()).unwrap();
        let docs = report.corpus.docs();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_id, "p1");
        assert_eq!(docs[0].gold_loe, None);
        assert_eq!(docs[1].gold_loe, Some(LoeLabel::L1a));
        assert_eq!(docs[1].text(), "t a");
    }

    #[test]
    fn duplicate_ids_abort() {
        let input = "{\"doc_id\":\"p1\",\"title\":\"t\",\"abstract\":\"a\"}\n{\"doc_id\":\"p1\",\"title\":\"u\",\"abstract\":\"b\"}\n";
        let err = read_corpus(input.as_bytes(), LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { ref doc_id, line: 2 } if doc_id == "p1"));
        let opts = LoadOptions {
            on_malformed: OnMalformed::SkipAndWarn,
        };
        assert!(read_corpus(input.as_bytes(), opts).is_err());
    }

    #[test]
    fn malformed_line_reports_line_number_or_is_skipped() {
        let input = "{\"doc_id\":\"p1\"}\nnot json\n{\"doc_id\":\"p3\",\"loe\":\"9z\"}\n{\"doc_id\":\"p4\"}\n";
        let err = read_corpus(input.as_bytes(), LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Record { line: 2, .. }));

        let opts = LoadOptions {
            on_malformed: OnMalformed::SkipAndWarn,
        };
        let report = read_corpus(input.as_bytes(), opts).unwrap();
        assert_eq!(report.corpus.len(), 2);
        assert_eq!(report.skipped.iter().map(|s| s.0).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn split_of_2816_items() {
        // 14/18/10/24/12/7/15 percent of 2816.
        let ds = dataset_with_counts(&[394, 507, 282, 676, 338, 197, 422]);
        assert_eq!(ds.len(), 2816);
        let split = stratified_split(&ds, SplitRatios::default(), 1).unwrap();
        assert_eq!(
            (split.train.len(), split.valid.len(), split.test.len()),
            (1690, 563, 563)
        );
    }

    #[test]
    fn ten_items_split_six_two_two() {
        let ds = dataset_with_counts(&[0, 0, 10, 0, 0, 0, 0]);
        let split = stratified_split(&ds, SplitRatios::default(), 3).unwrap();
        assert_eq!(
            (split.train.len(), split.valid.len(), split.test.len()),
            (6, 2, 2)
        );
    }

    #[test]
    fn tiny_classes_go_to_train_first() {
        let ds = dataset_with_counts(&[1, 2, 10, 0, 0, 0, 0]);
        let split = stratified_split(&ds, SplitRatios::default(), 3).unwrap();
        assert_eq!(split.train.class_counts()[0], 1);
        assert_eq!(split.train.class_counts()[1], 1);
        assert_eq!(split.valid.class_counts()[1], 1);
    }

    #[test]
    fn bad_ratios_rejected() {
        assert!(SplitRatios::new(0.5, 0.2, 0.2).is_err());
        assert!(SplitRatios::new(1.0, 0.0, 0.0).is_err());
        assert!(SplitRatios::new(0.6, 0.2, 0.2).is_ok());
    }

    #[test]
    fn distributions() {
        let ds = dataset_with_counts(&[0, 0, 0, 5, 0, 0, 0]);
        let dist = label_distribution(&ds).unwrap();
        assert_eq!(dist.len(), 1);
        assert_eq!(dist[&LoeLabel::L2b], 1.0);
        let empty = LabeledDataset::new("e", vec![]);
        assert!(label_distribution(&empty).is_err());

        let guidelines = dataset_with_counts(&[394, 507, 282, 676, 338, 197, 422]);
        let dist = label_distribution(&guidelines).unwrap();
        let expected = [0.14, 0.18, 0.10, 0.24, 0.12, 0.07, 0.15];
        for (l, e) in LoeLabel::ALL.iter().zip(expected) {
            assert!((dist[l] - e).abs() < 0.005, "{l}: {} vs {e}", dist[l]);
        }
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn label_files() {
        let labels = read_labels("# gold\np1 1b\n\np2\t4\n".as_bytes()).unwrap();
        assert_eq!(labels["p1"], LoeLabel::L1b);
        assert_eq!(labels["p2"], LoeLabel::L4);
        assert!(matches!(read_labels("p1 1b\np1 2a\n".as_bytes()), Err(Error::DuplicateId { line: 2, .. })));
        assert!(matches!(read_labels("p1 9z\n".as_bytes()), Err(Error::Record { line: 1, .. })));
        assert!(matches!(read_labels("p1\n".as_bytes()), Err(Error::Record { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn split_partitions_preserve_proportions(
            counts in proptest::array::uniform7(3usize..120),
            seed in any::<u64>(),
        ) {
            let ds = dataset_with_counts(&counts);
            let ratios = SplitRatios::default();
            let a = stratified_split(&ds, ratios, seed).unwrap();
            let b = stratified_split(&ds, ratios, seed).unwrap();
            prop_assert_eq!(&a, &b);

            let mut ids: Vec<&str> = a.train.items.iter()
                .chain(&a.valid.items)
                .chain(&a.test.items)
                .map(|(d, _)| d.doc_id.as_str())
                .collect();
            prop_assert_eq!(ids.len(), ds.len());
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), ds.len());

            let parts = [&a.train, &a.valid, &a.test];
            let r = [0.6, 0.2, 0.2];
            for c in 0..7 {
                for (p, ratio) in parts.iter().zip(r) {
                    let got = p.class_counts()[c] as f64;
                    prop_assert!((got - counts[c] as f64 * ratio).abs() <= 1.0 + 1e-9);
                }
                let full = counts[c] as f64 / ds.len() as f64;
                let train = a.train.class_counts()[c] as f64 / a.train.len() as f64;
                prop_assert!((train - full).abs() <= 1.0 / a.train.len() as f64 + 1e-12);
            }
        }
    }
}
