//! Datasets with their premise pairings, ablation cells, table metrics and
//! cluster-bootstrap statistics.
//!
//! A cell trains one model on one dataset for every seed and evaluates each
//! trained pair of policies; the report pools the evaluation episodes of all
//! seeds. Percentages are ratios of sums over episodes, and every interval or
//! σ resamples whole episodes.

mod data;
mod metrics;
mod stats;
mod suite;

pub use data::{datapoints, generate_dataset, generate_sample, DatasetId, Sample, SizeModel, SizeRange};
pub use metrics::{annotate, compute_metrics, EpisodeCounts, GalleryEntry, Metric, MetricsRow};
pub use stats::{
    cluster_bootstrap, inverse_normal, normal_cdf, pairwise_sigma, BootstrapResult, Pairwise, Ratio, Sigma,
    DEFAULT_RESAMPLES, SIGMA_CLIP,
};
pub use suite::{
    assemble_report, build_experiment, dataset_seed, evaluation_seed, nearest_misses, run_ablation_suite, run_cell,
    run_seed, training_seed, CellFailure, CellLogs, CellResult, Experiment, ExperimentSpec, GalleryRow,
    PairwiseMatrix, Report, SeedRun, SuiteOutcome, TableRow, DEFAULT_EVAL_EPISODES, DEFAULT_PER_CLASS, DEFAULT_SEEDS,
    PER_CLASS_RANGE,
};
