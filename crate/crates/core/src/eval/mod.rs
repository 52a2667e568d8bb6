//! Retrieval and classification evaluation.

pub mod experiment;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod trec;

pub use experiment::{band_runs, run_experiment, BandResult, ExperimentConfig, ExperimentReport, MetricSet};
pub use metrics::{confusion_matrix, macro_f1, ndcg_at_k, p_at_10, r_prec, rmse, ConfusionMatrix};
pub use report::{render_experiment, OutputFormat};
pub use stats::{bonferroni, paired_t_test, TTest};
pub use trec::{load_qrels, load_run, load_topics, parse_qrels, parse_run, parse_topics, write_run, Qrels, Run};
