use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use loe_core::classifier::{
    aggregate_term_scores, ensemble, explain_document, import_external_predictions, write_predictions, ExplainParams,
    Prediction, TextClassifier,
};
use loe_core::corpus::{write_corpus, Document};
use loe_core::eval::report::distribution_table;
use loe_core::LoeLabel;
use rayon::prelude::*;

use crate::output::{emit, json, read_corpus, Format};
use crate::{usage, ReportArgs};

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Predictions file (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Also write the corpus with `assigned_loe` filled in.
    #[arg(long)]
    tagged: Option<PathBuf>,
    #[arg(long)]
    skip_malformed: bool,
    /// Format of the level distribution printed on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn load_model(path: &PathBuf) -> Result<TextClassifier> {
    TextClassifier::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn summary(labels: &[LoeLabel], format: Format) -> Result<String> {
    Ok(match format {
        Format::Text => distribution_table(labels),
        Format::Json | Format::Csv => {
            let mut counts: BTreeMap<LoeLabel, usize> = LoeLabel::ALL.iter().map(|l| (*l, 0)).collect();
            for l in labels {
                *counts.entry(*l).or_default() += 1;
            }
            if format == Format::Json {
                json(&counts)?
            } else {
                let mut out = String::from("level,count,share\n");
                for (l, c) in counts {
                    let _ = writeln!(out, "{l},{c},{:.6}", c as f64 / labels.len().max(1) as f64);
                }
                out
            }
        }
    })
}

pub fn classify(args: ClassifyArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let corpus = read_corpus(&args.corpus, args.skip_malformed)?;
    let preds: Vec<Prediction> = corpus.docs().par_iter().map(|d| model.predict_document(d)).collect();
    write_predictions(&args.out, &preds).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.tagged {
        let tagged: Vec<Document> = corpus
            .docs()
            .iter()
            .zip(&preds)
            .map(|(d, p)| d.clone().with_assigned(p.chosen))
            .collect();
        write_corpus(path, &tagged).with_context(|| format!("writing {}", path.display()))?;
    }
    let labels: Vec<LoeLabel> = preds.iter().map(|p| p.chosen).collect();
    emit(None, &summary(&labels, args.format)?)
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    /// Prediction files to merge.
    files: Vec<PathBuf>,
    /// More prediction files (same as positional).
    #[arg(long)]
    predictions: Vec<PathBuf>,
    /// Merged predictions (JSON lines); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Level distribution summary on standard error.
    #[arg(long)]
    summary: bool,
}

pub fn vote(args: VoteArgs) -> Result<()> {
    let files: Vec<PathBuf> = args.files.into_iter().chain(args.predictions).collect();
    if files.len() < 2 {
        return Err(usage("vote needs at least two prediction files"));
    }
    let members = files
        .iter()
        .map(|p| import_external_predictions(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let decisions = ensemble(&members)?;
    let mut text = String::new();
    for d in &decisions {
        text.push_str(&serde_json::to_string(d)?);
        text.push('\n');
    }
    emit(args.out.as_ref(), &text)?;
    if args.summary {
        let labels: Vec<LoeLabel> = decisions.iter().map(|d| d.loe).collect();
        let _ = std::io::stderr().write_all(distribution_table(&labels).as_bytes());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Explain only these documents (repeatable).
    #[arg(long = "doc")]
    docs: Vec<String>,
    /// Explain at most this many documents, in corpus order.
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// Perturbed samples per document.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Terms listed per level.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    skip_malformed: bool,
    #[command(flatten)]
    report: ReportArgs,
}

pub fn explain(args: ExplainArgs) -> Result<()> {
    if args.samples < 2 || args.top == 0 || args.limit == 0 {
        return Err(usage("--samples must be at least 2; --top and --limit positive"));
    }
    let model = load_model(&args.model)?;
    let corpus = read_corpus(&args.corpus, args.skip_malformed)?;
    let docs: Vec<&Document> = if args.docs.is_empty() {
        corpus.docs().iter().take(args.limit).collect()
    } else {
        args.docs
            .iter()
            .map(|id| corpus.get(id).with_context(|| format!("document {id:?} not in corpus")))
            .collect::<Result<_>>()?
    };
    let explanations = docs
        .par_iter()
        .enumerate()
        .filter_map(|(i, d)| {
            let params = ExplainParams {
                n_samples: args.samples,
                seed: args.seed.wrapping_add(i as u64),
                ..Default::default()
            };
            match explain_document(&model, d, &params) {
                Ok(e) => Some(Ok(e)),
                Err(loe_core::Error::Empty(_)) => {
                    log::warn!("{}: no terms to explain", d.doc_id);
                    None
                }
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let top = aggregate_term_scores(&explanations, args.top)?;
    let text = match args.report.format {
        Format::Text => loe_core::eval::report::term_table(&top),
        Format::Json => json(&top)?,
        Format::Csv => {
            let mut out = String::from("level,rank,term,score\n");
            for (l, terms) in &top {
                for (r, (t, s)) in terms.iter().enumerate() {
                    let _ = writeln!(out, "{l},{},{t},{s:.6}", r + 1);
                }
            }
            out
        }
    };
    emit(args.report.out.as_ref(), &text)
}
