//! Bandwidth selection, the Monte-Carlo coverage experiment, and its report.

mod bandwidth;
mod config;
mod report;
mod run;

pub use bandwidth::{normal_scale_constants, select_bandwidths};
pub use config::{BandwidthRule, ExperimentConfig, GridConfig, Method, FLOW_STEP_FRAC};
pub use report::{fmt17, read_report_csv, CoverageReport, MethodSummary, ReportRow, REPORT_COLUMNS};
pub use run::{
    fit_region, run_case, run_case_alphas, run_overlay, Experiment, FittedRegion, MethodOutcome, MethodStatus, Overlay,
    RegionSettings, RunRecord, MAX_ABORTED_SHARE,
};
