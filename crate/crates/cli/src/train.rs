use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use loe_core::classifier::{
    cross_validate, ensemble, import_external_predictions, Classifier, ExternalPrediction, ForestParams,
    MajorityClassifier, PipelineParams, TextClassifier,
};
use loe_core::corpus::{load_labels, stratified_split, LabeledDataset, SplitRatios};
use loe_core::eval::report::{confusion_table, model_csv, model_table, ModelRow};
use loe_core::eval::{bonferroni, confusion_matrix, macro_f1, paired_t_test, rmse, ConfusionMatrix};
use loe_core::LoeLabel;
use serde::Serialize;

use crate::output::{emit, json, read_corpus, Format};
use crate::{usage, ReportArgs};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled corpus (JSON lines with `loe` gold labels).
    #[arg(long)]
    corpus: PathBuf,
    /// Gold labels as `doc_id label` lines; replaces labels in the corpus.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Where to save the trained model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Prediction files of other models to score on the same test split;
    /// with two or more, their majority vote is scored too.
    #[arg(long)]
    predictions: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-validation folds for the significance test (0 to skip).
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Comparisons for the Bonferroni correction.
    #[arg(long, default_value_t = 1)]
    comparisons: usize,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    /// Number of chi-squared selected features.
    #[arg(long, default_value_t = 2000)]
    features: usize,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long)]
    skip_malformed: bool,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Serialize)]
struct CvSummary {
    folds: usize,
    forest_f1: f64,
    majority_f1: f64,
    t: f64,
    p: f64,
    corrected_alpha: f64,
    significant: bool,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    seed: u64,
    model_id: String,
    split: [usize; 3],
    models: Vec<ModelRow>,
    confusion: ConfusionMatrix,
    cross_validation: Option<CvSummary>,
}

fn dataset(args: &TrainArgs) -> Result<LabeledDataset> {
    let corpus = read_corpus(&args.corpus, args.skip_malformed)?;
    let Some(path) = &args.labels else {
        return LabeledDataset::from_corpus("corpus", &corpus).context("corpus needs gold labels (or pass --labels)");
    };
    let labels = load_labels(path).with_context(|| format!("reading labels {}", path.display()))?;
    let items: Vec<_> = corpus
        .docs()
        .iter()
        .filter_map(|d| labels.get(&d.doc_id).map(|l| (d.clone(), *l)))
        .collect();
    let unknown = labels.keys().filter(|id| corpus.get(id).is_none()).count();
    if unknown > 0 {
        log::warn!("{unknown} labeled id(s) not in the corpus");
    }
    if items.len() < corpus.len() {
        log::warn!("{} document(s) without a label left out", corpus.len() - items.len());
    }
    Ok(LabeledDataset::new("corpus", items))
}

fn score(model: &str, truth: &[LoeLabel], pred: &[LoeLabel]) -> Result<ModelRow> {
    Ok(ModelRow {
        model: model.to_string(),
        f1: macro_f1(truth, pred)?,
        rmse: rmse(truth, pred)?,
    })
}

/// Scores external predictions on the test documents they cover.
fn external_rows(files: &[PathBuf], test: &LabeledDataset) -> Result<Vec<ModelRow>> {
    let gold: HashMap<&str, LoeLabel> = test.items.iter().map(|(d, l)| (d.doc_id.as_str(), *l)).collect();
    let mut members: Vec<Vec<ExternalPrediction>> = Vec::new();
    let mut rows = Vec::new();
    for path in files {
        let preds = import_external_predictions(path).with_context(|| format!("reading {}", path.display()))?;
        let on_test: Vec<ExternalPrediction> =
            preds.into_iter().filter(|p| gold.contains_key(p.doc_id())).collect();
        if on_test.is_empty() {
            anyhow::bail!("{} covers no test document", path.display());
        }
        if on_test.len() < gold.len() {
            log::warn!("{} covers {} of {} test documents", path.display(), on_test.len(), gold.len());
        }
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for p in &on_test {
            truth.push(gold[p.doc_id()]);
            pred.push(p.to_vote()?.label);
        }
        let name = path.file_stem().map_or("external".into(), |s| s.to_string_lossy().into_owned());
        rows.push(score(&name, &truth, &pred)?);
        members.push(on_test);
    }
    if members.len() >= 2 {
        let decisions = ensemble(&members)?;
        let truth: Vec<LoeLabel> = decisions.iter().map(|d| gold[d.doc_id.as_str()]).collect();
        let pred: Vec<LoeLabel> = decisions.iter().map(|d| d.loe).collect();
        rows.push(score("Vote", &truth, &pred)?);
    }
    Ok(rows)
}

pub fn run(args: TrainArgs) -> Result<()> {
    if args.folds == 1 {
        return Err(usage("--folds must be 0 or at least 2"));
    }
    if args.trees == 0 || args.features == 0 {
        return Err(usage("--trees and --features must be positive"));
    }
    let ds = dataset(&args)?;
    let split = stratified_split(&ds, SplitRatios::default(), args.seed)?;
    let params = PipelineParams {
        n_selected: args.features,
        forest: ForestParams {
            n_trees: args.trees,
            seed: args.seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let model = TextClassifier::train(&split.train, &params)?;
    let truth: Vec<LoeLabel> = split.test.labels().collect();
    let pred: Vec<LoeLabel> = split.test.items.iter().map(|(d, _)| model.predict_document(d).chosen).collect();
    let majority = MajorityClassifier::fit(&split.train.labels().collect::<Vec<_>>())?;
    let base: Vec<LoeLabel> = vec![majority.label(); truth.len()];

    let mut rows = vec![score("RandomForest", &truth, &pred)?, score("Majority", &truth, &base)?];
    rows.extend(external_rows(&args.predictions, &split.test)?);

    let cross_validation = if args.folds >= 2 {
        let mut dev = split.train.clone();
        dev.items.extend(split.valid.items.iter().cloned());
        let folds = cross_validate(&dev, &params, args.folds, args.seed)?;
        let f: Vec<f64> = folds.iter().map(|s| s.forest_f1).collect();
        let m: Vec<f64> = folds.iter().map(|s| s.majority_f1).collect();
        let t = paired_t_test(&f, &m)?;
        let corrected_alpha = bonferroni(0.05, args.comparisons);
        Some(CvSummary {
            folds: args.folds,
            forest_f1: f.iter().sum::<f64>() / f.len() as f64,
            majority_f1: m.iter().sum::<f64>() / m.len() as f64,
            t: t.t,
            p: t.p,
            corrected_alpha,
            significant: t.p < corrected_alpha,
        })
    } else {
        None
    };

    if let Some(path) = &args.model {
        model.save(path).with_context(|| format!("saving model to {}", path.display()))?;
        log::info!("model saved to {}", path.display());
    }

    let report = TrainReport {
        seed: args.seed,
        model_id: model.model_id().to_string(),
        split: [split.train.len(), split.valid.len(), split.test.len()],
        models: rows,
        confusion: confusion_matrix(&truth, &pred)?,
        cross_validation,
    };
    let text = match args.report.format {
        Format::Json => json(&report)?,
        Format::Csv => model_csv(&report.models),
        Format::Text => render_text(&report),
    };
    emit(args.report.out.as_ref(), &text)
}

fn render_text(r: &TrainReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "split: train {} / valid {} / test {} (seed {})\n",
        r.split[0], r.split[1], r.split[2], r.seed
    );
    out.push_str(&model_table(&r.models));
    if let Some(cv) = &r.cross_validation {
        let _ = writeln!(
            out,
            "\n{}-fold cross-validation: RandomForest F1 {:.2}, Majority F1 {:.2}; t = {:.4}, p = {:.4} (alpha {:.4}){}",
            cv.folds,
            cv.forest_f1,
            cv.majority_f1,
            cv.t,
            cv.p,
            cv.corrected_alpha,
            if cv.significant { " *" } else { "" }
        );
    }
    let _ = writeln!(out, "\nconfusion matrix (RandomForest, test split)");
    out.push_str(&confusion_table(&r.confusion));
    let cells: Vec<String> = LoeLabel::ALL
        .iter()
        .map(|l| format!("{l} {:.2}", r.confusion.f1(*l)))
        .collect();
    let _ = writeln!(out, "\nper-level F1: {}", cells.join(", "));
    out
}
