//! Configuration-driven verification campaigns for `alphaloc`, with JSON,
//! CSV and text reports.

pub mod campaign;
pub mod config;
pub mod error;
pub mod report;

use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use report::{emit, CheckRecord, Format, Report, Status};

/// Runs the campaign for `kind`. Failing or aborted checks are recorded, never raised.
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig) -> Report {
    let start = Instant::now();
    let checks = campaign::checks_for(kind, cfg);
    let echo = ExperimentConfig {
        experiment: Some(kind),
        ..cfg.clone()
    };
    Report::new(kind.name(), echo, checks, start.elapsed())
}
