//! Cross-validated experiments, significance tests and report formats.

pub mod experiment;
pub mod folds;
pub mod report;
pub mod stats;

pub use experiment::{
    run_experiment, run_experiment_on, CellFailure, DatasetInfo, DatasetSource, ExperimentConfig,
    ResultTable, RunRecord, TimingRow,
};
pub use folds::{stratified_kfold, FoldPlan};
pub use report::{
    format_stats, format_summary, write_reports, write_results_csv, write_timing_csv, ReportFiles,
};
pub use stats::{
    critical_difference, friedman_test, nemenyi_posthoc, nemenyi_q, rank_descending, win_draw_loss,
    FriedmanResult, Outcome, StatReport, WdlCell, WdlTable,
};
