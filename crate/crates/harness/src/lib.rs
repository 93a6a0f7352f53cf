//! Seeded experiment runner for the bandit learners.
//!
//! A JSON [`ExperimentConfig`] selects a setting, an adversary and a list of seeds.
//! [`run_experiment`] produces one [`RegretTrace`] per seed plus a [`Summary`];
//! [`write_outputs`] stores them as CSV files and `summary.json`.

pub mod baseline;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod trace;
pub mod validate;

pub use config::{EtaRule, ExperimentConfig, Setting};
pub use error::HarnessError;
pub use output::write_outputs;
pub use runner::{run_experiment, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, ExperimentResult, FailureKind, RunOptions, RunOutcome, Summary};
pub use trace::RegretTrace;
pub use validate::{validate_freedman, FreedmanSummary};
