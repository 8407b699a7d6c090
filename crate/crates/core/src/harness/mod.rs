//! Configuration-driven experiments: stream x learner x detector pipelines
//! repeated over seeds, per-concept averaging, significance tests and CSV
//! reports.

mod config;
mod report;
mod run;

pub use config::{
    default_pipelines, ExperimentConfig, PipelineSpec, DEFAULT_METRIC_DECAY, DEFAULT_RUNS,
    OUTPUT_ROOT_ENV,
};
pub use report::{
    aggregate_and_test, emit_report, export_run_series, mean_std, read_alarm_csv, run_and_report,
    summarize_pipelines, DetectorRow, Metric, PipelineResult, Report, SummaryRow, Window,
    SIGNIFICANCE,
};
pub use run::{
    concept_averages, concept_windows, run_experiment, run_single, run_with_observer,
    window_average, ConceptAverages, RunRecord, StepRecord, WindowAverages,
};
