//! Monte Carlo studies for the layered Hill estimators: point-estimate
//! tables under missing extremes, interval coverage, and exports of the
//! normalized statistics.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod stats;

pub use config::{ConstraintSpec, EstimatorSpec, ExperimentConfig, ModelSpec, Outputs, MIX_NAME};
pub use error::{CellError, HarnessError, Result};
pub use experiment::{
    aggregate, collect_samples, coverage_experiment, normalized_samples, run_experiment, CellEstimate,
    CoverageRow, ExperimentReport, Plan, ReplicateResult, ReportRow, StatisticSample,
};
pub use output::{export_normalized_samples, write_coverage_csv, write_report_csv, write_samples_csv};
pub use stats::{ks_statistic, mean_sd};
