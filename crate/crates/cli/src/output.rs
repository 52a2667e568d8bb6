use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use loe_core::corpus::{load_corpus, Corpus, LoadOptions, OnMalformed};
use loe_core::eval::OutputFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

/// Writes `text` to `out`, or to standard output.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn read_corpus(path: &Path, skip_malformed: bool) -> Result<Corpus> {
    let options = LoadOptions {
        on_malformed: if skip_malformed { OnMalformed::SkipAndWarn } else { OnMalformed::Abort },
    };
    let report = load_corpus(path, options).with_context(|| format!("reading corpus {}", path.display()))?;
    if !report.skipped.is_empty() {
        log::warn!("{}: skipped {} malformed line(s)", path.display(), report.skipped.len());
    }
    Ok(report.corpus)
}
