use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use loe_core::corpus::write_corpus;
use loe_core::synth::{medline_like, noisy_dataset, MedlineParams};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Documents in the search collection.
    #[arg(long, default_value_t = 2000)]
    docs: usize,
    #[arg(long, default_value_t = 20)]
    topics: usize,
    /// Documents in the labeled training set.
    #[arg(long, default_value_t = 2816)]
    labeled: usize,
    /// Fraction of training labels replaced at random.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

/// Writes `labeled.jsonl`, `collection.jsonl`, `topics.tsv` and
/// `qrels.txt`.
pub fn run(args: SynthArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.noise) || args.topics == 0 || args.docs < args.topics {
        return Err(crate::usage("need 0 <= --noise <= 1 and 1 <= --topics <= --docs"));
    }
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let labeled = noisy_dataset(args.labeled, args.noise, args.seed);
    write_corpus(args.out.join("labeled.jsonl"), labeled.items.iter().map(|(d, _)| d))?;

    let c = medline_like(&MedlineParams {
        n_docs: args.docs,
        n_topics: args.topics,
        seed: args.seed,
        ..Default::default()
    });
    write_corpus(args.out.join("collection.jsonl"), &c.docs)?;
    let mut topics = String::new();
    for (id, q) in &c.topics {
        let _ = writeln!(topics, "{id}\t{q}");
    }
    std::fs::write(args.out.join("topics.tsv"), topics)?;
    let mut qrels = String::new();
    for (topic, judged) in &c.qrels.topics {
        let mut docs: Vec<_> = judged.iter().collect();
        docs.sort();
        for (doc, grade) in docs {
            let _ = writeln!(qrels, "{topic} 0 {doc} {grade}");
        }
    }
    std::fs::write(args.out.join("qrels.txt"), qrels)?;
    println!(
        "wrote {} labeled documents, {} collection documents and {} topics to {}",
        labeled.len(),
        c.docs.len(),
        c.topics.len(),
        args.out.display()
    );
    Ok(())
}
