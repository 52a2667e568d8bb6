//! `loe`: tag documents with levels of evidence, build evidence-filtered
//! indexes, run retrieval experiments and serve the results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod output;
mod retrieval;
mod synth;
mod tagging;
mod train;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "loe", version, about = "Level-of-evidence tagging, filtering and evaluation")]
struct Cli {
    /// Increase log detail (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the forest baseline on a labeled corpus and report test-split metrics.
    Train(train::TrainArgs),
    /// Tag a corpus with a trained model; writes predictions as JSON lines.
    Classify(tagging::ClassifyArgs),
    /// Merge two or more prediction files by majority vote.
    Vote(tagging::VoteArgs),
    /// Build a search index from a tagged corpus.
    Index(retrieval::IndexArgs),
    /// Run one query against an index.
    Search(retrieval::SearchArgs),
    /// Evaluate evidence bands over topics and relevance judgments.
    Eval(retrieval::EvalArgs),
    /// Aggregate per-document explanations into top terms per level.
    Explain(tagging::ExplainArgs),
    /// Serve search, classification and explanation over HTTP.
    Serve(retrieval::ServeArgs),
    /// Write a seeded synthetic corpus, topics and judgments for demos.
    Synth(synth::SynthArgs),
}

/// Options shared by commands that print reports.
#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A problem with how the command was invoked rather than with its data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// The error chain on one line, leaving out causes that a previous message
/// already spells out.
fn describe(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !parts.last().is_some_and(|p| p.contains(&msg)) {
            parts.push(msg);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Classify(a) => tagging::classify(a),
        Command::Vote(a) => tagging::vote(a),
        Command::Index(a) => retrieval::index(a),
        Command::Search(a) => retrieval::search(a),
        Command::Eval(a) => retrieval::eval(a),
        Command::Explain(a) => tagging::explain(a),
        Command::Serve(a) => retrieval::serve(a),
        Command::Synth(a) => synth::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
