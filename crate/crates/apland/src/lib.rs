//! Experiment harness for adaptive parameter landscape profiling: campaign
//! execution, artifact formats, measures, aggregation, SVG rendering and
//! the `apland` command line.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod render;
pub mod run;

pub use analysis::{aggregate_measures, rank_individuals, report_points, select_median_run, RunRecord, TrendRow};
pub use config::{ExperimentConfig, ResolvedConfig};
pub use error::{HarnessError, Result};
pub use run::{execute_run, run_experiment, Campaign, RunArtifacts};
