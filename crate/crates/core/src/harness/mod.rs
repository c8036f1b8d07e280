//! Experiment configuration, orchestration and statistics.

pub mod config;
pub mod experiment;
pub mod stats;

pub use config::{ExperimentConfig, ModelSpec, OutputSpec};
pub use experiment::{run_distance_experiment, summarize, DistanceRow, DistanceSampleSet, ExperimentSummary, SizeSummary};
pub use stats::{ecdf, ecdf_csv, hill_estimator, hill_plateau, ks_statistic, log_tail_slope, median, Plateau};
