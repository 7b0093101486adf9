//! Experiment runner: trial folds, the three training methods, layer sweeps,
//! aggregation and plot-ready report files.

mod experiment;
mod metrics;
mod pca;
mod report;

pub use experiment::{
    compare, layer_sweep, run_fold, ExperimentConfig, FoldData, FoldRun, LayerPoint, Method,
    MethodSummary, PreparedSession,
};
pub use metrics::{aggregate, Metrics, Stat, Summary};
pub use pca::{pca_project, PcaProjection};
pub use report::{
    average_pattern, write_compare_bundle, write_confusion_csv, write_layer_sweep_csv,
    write_pattern_report, write_predictions_csv,
};
