//! Monte-Carlo validation of the concentration bound.

use hpbandit::exec::Execution;
use hpbandit::freedman::{mc_validate_freedman, FreedmanReport};
use serde::Serialize;

use crate::config::{ExperimentConfig, ProcessSpec, Setting};
use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub passed: bool,
    #[serde(flatten)]
    pub report: FreedmanReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreedmanSummary {
    pub name: String,
    pub config_hash: String,
    pub process: ProcessSpec,
    pub results: Vec<DeltaReport>,
}

impl FreedmanSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

pub fn validate_freedman(cfg: &ExperimentConfig, execution: Execution) -> Result<FreedmanSummary, HarnessError> {
    cfg.validate()?;
    let Setting::Freedman(s) = &cfg.setting else {
        return Err(HarnessError::Config(format!("expected a freedman setting, found {}", cfg.setting.label())));
    };
    let process = s.process.build()?;
    let mut results = Vec::with_capacity(s.deltas.len());
    for &delta in &s.deltas {
        let report = mc_validate_freedman(process.as_ref(), delta, s.trials, s.seed, execution)?;
        results.push(DeltaReport { delta, passed: report.passed(), report });
    }
    Ok(FreedmanSummary { name: cfg.name.clone(), config_hash: cfg.hash(), process: s.process.clone(), results })
}
