use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::runner::ExperimentResult;

/// Writes `trace_seed<N>.csv` (and `exp3_seed<N>.csv` for the baseline) plus `summary.json`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path, traces: bool) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    if traces {
        let groups = [("trace", &result.runs), ("exp3", &result.baseline)];
        for (prefix, runs) in groups {
            for run in runs.iter() {
                let path = dir.join(format!("{prefix}_seed{}.csv", run.seed));
                let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                run.trace.write_csv(BufWriter::new(file))?;
                written.push(path);
            }
        }
    }
    let path = dir.join("summary.json");
    write_json(&path, &result.summary)?;
    written.push(path);
    Ok(written)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
