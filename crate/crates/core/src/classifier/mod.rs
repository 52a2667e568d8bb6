//! Evidence-level classifiers, prediction adapters, ensembles and local
//! explanations.

use serde::{Deserialize, Serialize};

use crate::label::{ClassScores, LoeLabel};
use crate::textproc::{default_tokenizer, TermSequence, Tokenizer};

pub mod adapters;
pub mod explain;
pub mod forest;
pub mod pipeline;
pub mod predictions;
pub mod vote;

pub use adapters::{multilabel_to_label, regression_to_label, DEFAULT_MULTILABEL_THRESHOLD};
pub use explain::{aggregate_term_scores, explain, explain_document, ExplainParams, Explanation, TermWeight};
pub use forest::{train_forest, DecisionTree, ForestModel, ForestParams, MaxFeatures};
pub use pipeline::{cross_validate, FoldScore, MajorityClassifier, PipelineParams, TextClassifier};
pub use predictions::{
    import_external_predictions, read_predictions, write_predictions, ExternalPrediction,
};
pub use vote::{ensemble, majority_vote, EnsembleDecision, Vote};

/// Per-document class confidences and the label they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub confidences: ClassScores,
    #[serde(rename = "loe")]
    pub chosen: LoeLabel,
    pub source: String,
}

impl Prediction {
    pub fn new(doc_id: impl Into<String>, confidences: ClassScores, source: impl Into<String>) -> Self {
        Prediction {
            doc_id: doc_id.into(),
            chosen: confidences.argmax(),
            confidences,
            source: source.into(),
        }
    }

    /// The chosen label, or `Abstain` when `abstain_below` is set and the
    /// winning confidence falls under it.
    pub fn verdict(&self, abstain_below: Option<f64>) -> Verdict {
        match abstain_below {
            Some(t) if self.confidences.get(self.chosen) < t => Verdict::Abstain,
            _ => Verdict::Label(self.chosen),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Label(LoeLabel),
    Abstain,
}

/// Unbounded real-valued ordinal estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionPrediction {
    pub doc_id: String,
    pub raw: f64,
}

/// Anything that scores a term sequence over the seven levels.
pub trait Classifier: Send + Sync {
    fn model_id(&self) -> &str;

    fn confidences(&self, terms: &TermSequence) -> ClassScores;

    fn tokenizer(&self) -> &Tokenizer {
        default_tokenizer()
    }

    fn classify_text(&self, doc_id: &str, text: &str) -> Prediction {
        let terms = self.tokenizer().tokenize(text);
        Prediction::new(doc_id, self.confidences(&terms), self.model_id())
    }
}
