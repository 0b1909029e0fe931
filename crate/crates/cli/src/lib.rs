//! Experiment runner: configuration, scenario registry, seeded parallel
//! replication and output files.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;

pub use config::{AlphaRule, ExperimentConfig, ModelParams, Scenario, StepLawConfig};
pub use error::{CliError, CliResult};
pub use run::{run, run_task, RunManifest, RunOptions, StatsRecord, TaskOutput};
