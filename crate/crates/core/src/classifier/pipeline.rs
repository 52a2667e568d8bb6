//! Text-to-label pipeline: tokenizer, TF-IDF, chi-squared selection and a
//! random forest, persisted together as one JSON model file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestModel, ForestParams};
use super::{Classifier, Prediction};
use crate::corpus::{Document, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::metrics::{macro_f1, rmse};
use crate::label::{ClassScores, LoeLabel, NUM_LEVELS};
use crate::textproc::{chi2_select, fit_tfidf, SparseVector, TermSequence, TfidfModel, Tokenizer, DEFAULT_MIN_DF};

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub min_df: u32,
    /// Features kept by chi-squared selection.
    pub n_selected: usize,
    pub forest: ForestParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            min_df: DEFAULT_MIN_DF,
            n_selected: 2000,
            forest: ForestParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    format_version: u32,
    model_id: String,
    params: PipelineParams,
    tokenizer: Tokenizer,
    tfidf: TfidfModel,
    /// Vocabulary indices kept by feature selection, ascending.
    selected: Vec<usize>,
    forest: ForestModel,
}

impl TextClassifier {
    pub fn train(dataset: &LabeledDataset, params: &PipelineParams) -> Result<Self> {
        Self::train_with_tokenizer(dataset, params, Tokenizer::default())
    }

    pub fn train_with_tokenizer(
        dataset: &LabeledDataset,
        params: &PipelineParams,
        tokenizer: Tokenizer,
    ) -> Result<Self> {
        if dataset.items.is_empty() {
            return Err(Error::Empty("training set"));
        }
        let terms: Vec<TermSequence> = dataset.items.iter().map(|(d, _)| tokenizer.tokenize(&d.text())).collect();
        let labels: Vec<LoeLabel> = dataset.labels().collect();
        let tfidf = fit_tfidf(&terms, params.min_df)?;
        let full: Vec<SparseVector> = terms.iter().map(|t| tfidf.vectorize(t)).collect();
        let selection = chi2_select(&full, &labels, tfidf.vocabulary_size(), params.n_selected.max(1))?;
        let rows: Vec<SparseVector> = full.iter().map(|v| v.project(&selection.selected)).collect();
        let forest = train_forest(&rows, &labels, selection.selected.len(), &params.forest)?;
        Ok(TextClassifier {
            format_version: MODEL_FORMAT_VERSION,
            model_id: format!("rf-{}t-seed{}", params.forest.n_trees, params.forest.seed),
            params: params.clone(),
            tokenizer,
            tfidf,
            selected: selection.selected,
            forest,
        })
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    pub fn forest(&self) -> &ForestModel {
        &self.forest
    }

    pub fn selected_terms(&self) -> impl Iterator<Item = &str> {
        self.selected.iter().filter_map(|&i| self.tfidf.term(i))
    }

    pub fn vectorize(&self, terms: &TermSequence) -> SparseVector {
        self.tfidf.vectorize(terms).project(&self.selected)
    }

    pub fn predict_document(&self, doc: &Document) -> Prediction {
        self.classify_text(&doc.doc_id, &doc.text())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut model: TextClassifier = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        if model.selected.iter().any(|&i| i >= model.tfidf.vocabulary_size())
            || model.selected.len() != model.forest.n_features
        {
            return Err(Error::ModelFormat("selected features do not match vocabulary".into()));
        }
        model.forest.validate()?;
        model.tfidf.finish_load();
        Ok(model)
    }
}

impl Classifier for TextClassifier {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn confidences(&self, terms: &TermSequence) -> ClassScores {
        self.forest.confidences(&self.vectorize(terms))
    }

    fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }
}

/// Always predicts the most frequent training label (lower ordinal on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityClassifier {
    label: LoeLabel,
}

impl MajorityClassifier {
    pub fn fit(labels: &[LoeLabel]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("training labels"));
        }
        let mut counts = ClassScores::default();
        for l in labels {
            counts.0[l.ordinal()] += 1.0;
        }
        Ok(MajorityClassifier { label: counts.argmax() })
    }

    pub fn label(&self) -> LoeLabel {
        self.label
    }
}

impl Classifier for MajorityClassifier {
    fn model_id(&self) -> &str {
        "majority"
    }

    fn confidences(&self, _: &TermSequence) -> ClassScores {
        ClassScores::one_hot(self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub forest_f1: f64,
    pub forest_rmse: f64,
    pub majority_f1: f64,
    pub majority_rmse: f64,
}

/// Stratified K-fold comparison of the forest pipeline and the majority
/// baseline. Folds are dealt round-robin within each shuffled class.
pub fn cross_validate(
    dataset: &LabeledDataset,
    params: &PipelineParams,
    folds: usize,
    seed: u64,
) -> Result<Vec<FoldScore>> {
    if folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    if dataset.items.len() < folds {
        return Err(Error::InvalidArgument(format!(
            "{} items cannot fill {folds} folds",
            dataset.items.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; dataset.items.len()];
    let mut next = 0;
    for c in 0..NUM_LEVELS {
        let mut members: Vec<usize> = (0..dataset.items.len())
            .filter(|&i| dataset.items[i].1.ordinal() == c)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    let mut scores = Vec::with_capacity(folds);
    for k in 0..folds {
        let pick = |held: bool| LabeledDataset {
            name: format!("{}-fold{k}", dataset.name),
            items: dataset
                .items
                .iter()
                .zip(&fold_of)
                .filter(|(_, f)| (**f == k) == held)
                .map(|(item, _)| item.clone())
                .collect(),
        };
        let (train, test) = (pick(false), pick(true));
        let model = TextClassifier::train(&train, params)?;
        let baseline = MajorityClassifier::fit(&train.labels().collect::<Vec<_>>())?;
        let truth: Vec<LoeLabel> = test.labels().collect();
        let forest_pred: Vec<LoeLabel> = test.items.iter().map(|(d, _)| model.predict_document(d).chosen).collect();
        let majority_pred = vec![baseline.label(); truth.len()];
        scores.push(FoldScore {
            forest_f1: macro_f1(&truth, &forest_pred)?,
            forest_rmse: rmse(&truth, &forest_pred)?,
            majority_f1: macro_f1(&truth, &majority_pred)?,
            majority_rmse: rmse(&truth, &majority_pred)?,
        });
    }
    Ok(scores)
}
