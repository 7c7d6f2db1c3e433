//! Reproducible experiment driver: JSON configs, parallel ensembles with an
//! ordered merge, result files with checksums, and the Markdown report.

mod config;
mod output;
mod report;
mod run;

pub use config::{ExcursionConfig, ExperimentConfig, TGridSpec, TestConfig, SCHEMA_VERSION};
pub use output::{config_hash, run_experiment, run_stage, RunManifest, Stage, MANIFEST_FILE};
pub use report::{
    load_run, report, report_dirs, Check, LoadedRun, Report, COUNTING_TOLERANCE, HILL_TOLERANCE,
    RATIO_TOLERANCE,
};
pub use run::{
    evaluate_path, oracle_rows, path_pipeline, run_ensemble, CountingSummary, Diagnostics, Ensemble,
    OracleRow, Outcome, PathRecord, Summary, TailSummary, MAX_FAILURE_FRACTION,
};
