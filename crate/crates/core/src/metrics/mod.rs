//! Metrics (RMSE, Spearman), bootstrap intervals, aggregate rows and the
//! experiment drivers.

mod basic;
mod bootstrap;
mod experiments;
mod report;
mod represent;

pub use basic::{average_ranks, pearson, rmse, spearman};
pub use bootstrap::{
    bootstrap_ci, bootstrap_ci_clustered, quantile_sorted, resample_indices, BootstrapSettings, MetricKind, MetricResult,
    DEFAULT_LEVEL, DEFAULT_REPEATS, MAX_REDRAWS,
};
pub use experiments::{eval_label_matrix, eval_subsets, prediction_similarity, size_curve, EvalOptions};
pub use report::{Cell, EvalReport, Excluded, LabelKind};
pub use represent::{map_representation, Convention, ConventionRow, MappedPredictions};
