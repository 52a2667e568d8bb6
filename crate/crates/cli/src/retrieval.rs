use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use loe_core::classifier::{ensemble, import_external_predictions};
use loe_core::corpus::Document;
use loe_core::eval::{
    band_runs, load_qrels, load_topics, render_experiment, run_experiment, write_run, ExperimentConfig,
    ExperimentReport,
};
use loe_core::index::{build_index, load_index, save_index, Bm25Params, FilterBand, Index};
use loe_service::ServiceConfig;

use crate::output::{emit, json, read_corpus, Format};
use crate::{usage, ReportArgs};

/// A tagged corpus, optionally relabeled from prediction files.
#[derive(Debug, Args)]
pub struct TaggedCorpus {
    /// Corpus (JSON lines); documents need `assigned_loe` unless
    /// prediction files are given.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Prediction files assigning levels (majority vote when repeated).
    #[arg(long)]
    predictions: Vec<PathBuf>,
    #[arg(long)]
    skip_malformed: bool,
}

#[derive(Debug, Args)]
pub struct Bm25Args {
    #[arg(long, default_value_t = 1.2)]
    k1: f64,
    #[arg(long, default_value_t = 0.75)]
    b: f64,
}

fn tagged_docs(src: &TaggedCorpus) -> Result<Vec<Document>> {
    let path = src.corpus.as_ref().ok_or_else(|| usage("--corpus is required"))?;
    let corpus = read_corpus(path, src.skip_malformed)?;
    let mut docs = corpus.into_docs();
    if src.predictions.is_empty() {
        return Ok(docs);
    }
    let members = src
        .predictions
        .iter()
        .map(|p| import_external_predictions(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let decided: std::collections::HashMap<String, _> =
        ensemble(&members)?.into_iter().map(|d| (d.doc_id, d.loe)).collect();
    let mut missing = 0;
    for d in &mut docs {
        match decided.get(&d.doc_id) {
            Some(l) => d.assigned_loe = Some(*l),
            None if d.assigned_loe.is_none() => missing += 1,
            None => {}
        }
    }
    if missing > 0 {
        anyhow::bail!("{missing} document(s) have no predicted level");
    }
    Ok(docs)
}

fn build(src: &TaggedCorpus, bm25: &Bm25Args) -> Result<Index> {
    let docs = tagged_docs(src)?;
    Ok(build_index(&docs, Bm25Params { k1: bm25.k1, b: bm25.b })?)
}

fn open_index(path: &Path) -> Result<Index> {
    load_index(path).with_context(|| format!("loading index {}", path.display()))
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    source: TaggedCorpus,
    #[command(flatten)]
    bm25: Bm25Args,
    /// Index file to write.
    #[arg(long)]
    out: PathBuf,
}

pub fn index(args: IndexArgs) -> Result<()> {
    let idx = build(&args.source, &args.bm25)?;
    save_index(&idx, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "indexed {} documents, {} terms -> {}",
        idx.n_docs(),
        idx.n_terms(),
        args.out.display()
    );
    for band in FilterBand::ALL {
        println!("  {band:<6} {:>5.1}%", idx.admitted_fraction(band) * 100.0);
    }
    Ok(())
}

fn parse_band(s: &str) -> Result<FilterBand> {
    s.parse().map_err(|_| usage(format!("unknown band {s:?}; expected all, loe3, loe2 or loe1")))
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value = "all")]
    band: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Query text.
    #[arg(required = true)]
    query: Vec<String>,
    #[command(flatten)]
    report: ReportArgs,
}

pub fn search(args: SearchArgs) -> Result<()> {
    let band = parse_band(&args.band)?;
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let idx = open_index(&args.index)?;
    let hits = idx.search(&args.query.join(" "), band, args.k);
    let text = match args.report.format {
        Format::Json => json(&hits)?,
        Format::Csv => {
            let mut out = String::from("rank,doc_id,score,loe,title\n");
            for (i, h) in hits.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.6},{},\"{}\"", i + 1, h.doc_id, h.score, h.loe, h.title.replace('"', "\"\""));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for (i, h) in hits.iter().enumerate() {
                let _ = writeln!(out, "{:>3}  {:>8.4}  {:<2}  {}  {}", i + 1, h.score, h.loe, h.doc_id, h.title);
            }
            if hits.is_empty() {
                out.push_str("no results\n");
            }
            out
        }
    };
    emit(args.report.out.as_ref(), &text)
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prebuilt index; alternatively build one with --corpus.
    #[arg(long, conflicts_with = "corpus")]
    index: Option<PathBuf>,
    #[command(flatten)]
    source: TaggedCorpus,
    #[command(flatten)]
    bm25: Bm25Args,
    /// Topic file (TSV or TREC XML); repeat for several topic sets.
    #[arg(long, required = true)]
    topics: Vec<PathBuf>,
    /// Relevance judgments, one per --topics, in the same order.
    #[arg(long, required = true)]
    qrels: Vec<PathBuf>,
    /// Column names for the topic sets, comma separated; defaults to the
    /// topic file names.
    #[arg(long, value_delimiter = ',')]
    names: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "all,loe3,loe2,loe1")]
    bands: Vec<String>,
    /// NDCG cutoff.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Retrieval depth.
    #[arg(long, default_value_t = 1000)]
    depth: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Comparisons for the Bonferroni correction (default: filtered bands).
    #[arg(long)]
    comparisons: Option<usize>,
    /// Also write one TREC run file per topic set and band here.
    #[arg(long)]
    runs: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

pub fn eval(args: EvalArgs) -> Result<()> {
    if args.topics.len() != args.qrels.len() {
        return Err(usage("give one --qrels per --topics"));
    }
    if !args.names.is_empty() && args.names.len() != args.topics.len() {
        return Err(usage("give one --names entry per --topics"));
    }
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage("--alpha must be in (0, 1)"));
    }
    let bands = args.bands.iter().map(|b| parse_band(b)).collect::<Result<Vec<_>>>()?;
    let idx = match &args.index {
        Some(p) => open_index(p)?,
        None => build(&args.source, &args.bm25)?,
    };
    let config = ExperimentConfig {
        k: args.k,
        depth: args.depth,
        alpha: args.alpha,
        comparisons: args.comparisons,
        ..Default::default()
    };
    let mut reports: Vec<ExperimentReport> = Vec::new();
    for (i, (tp, qp)) in args.topics.iter().zip(&args.qrels).enumerate() {
        let name = match args.names.get(i) {
            Some(n) => n.clone(),
            None => tp.file_stem().map_or(format!("set{}", i + 1), |s| s.to_string_lossy().into_owned()),
        };
        let topics = load_topics(tp).with_context(|| format!("reading topics {}", tp.display()))?;
        let qrels = load_qrels(qp).with_context(|| format!("reading qrels {}", qp.display()))?;
        let report = run_experiment(&idx, &name, &topics, &qrels, &bands, &config)
            .with_context(|| format!("topic set {name}"))?;
        if !report.skipped_topics.is_empty() {
            log::warn!("{name}: {} topic(s) without relevant judgments skipped", report.skipped_topics.len());
        }
        if let Some(dir) = &args.runs {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let used: Vec<FilterBand> = report.bands.iter().map(|b| b.band).collect();
            for (band, run) in band_runs(&idx, &topics, &used, config.depth) {
                let file = dir.join(format!("{name}-{}.run", band.as_str().to_ascii_lowercase().replace('+', "plus")));
                write_run(&run, &file).with_context(|| format!("writing {}", file.display()))?;
            }
        }
        reports.push(report);
    }
    emit(args.report.out.as_ref(), &render_experiment(&reports, args.report.format.into())?)
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML configuration; other flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    listen: Option<String>,
    /// Band used when a request names none.
    #[arg(long)]
    band: Option<String>,
    #[arg(long)]
    max_k: Option<usize>,
    /// Allowed CORS origin (repeatable; `*` for any).
    #[arg(long)]
    cors: Vec<String>,
}

pub fn serve(args: ServeArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => ServiceConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let (Some(index), Some(model)) = (&args.index, &args.model) else {
                return Err(usage("serve needs --config or both --index and --model"));
            };
            ServiceConfig::new(index, model)
        }
    };
    if let Some(i) = args.index {
        config.index = i;
    }
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(l) = args.listen {
        config.listen = l;
    }
    if let Some(b) = &args.band {
        config.default_band = parse_band(b)?;
    }
    if let Some(k) = args.max_k {
        config.max_k = k;
    }
    if !args.cors.is_empty() {
        config.cors_origins = args.cors;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(loe_service::serve(config))?;
    Ok(())
}
