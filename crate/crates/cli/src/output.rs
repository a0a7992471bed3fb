//! Run reports: report.json, trace.csv, history.csv and circuit.json.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use vqclone_core::TrainTrace;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::run::{Metrics, RunOutput};

/// Contents of report.json.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: Value,
    pub metrics: Metrics,
    /// SHA-256 over the config echo and the metrics (wall time excluded), so
    /// identical runs share a hash.
    pub hash: String,
    pub wall_time_s: f64,
}

pub fn report_hash(config: &Value, metrics: &Metrics) -> String {
    let body = serde_json::to_string(&(config, metrics)).expect("JSON values serialize");
    Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory: `VQCLONE_OUT` if set, else the configured one, else `out`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    match std::env::var_os("VQCLONE_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
    }
}

fn write_trace(path: &Path, trace: &TrainTrace, clones: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TrainTrace::csv_header(clones))?;
    for row in trace.csv_rows() {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_history(path: &Path, history: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "best_cost"])?;
    for (i, c) in history.iter().enumerate() {
        w.write_record([i.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes all outputs of a run into `dir` and returns the report.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &RunOutput,
    wall_time_s: f64,
) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(dir)?;
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    let hash = report_hash(&config, &out.metrics);
    let report = RunReport { config, metrics: out.metrics.clone(), hash, wall_time_s };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("report.json"), text + "\n")?;
    if let Some((trace, clones)) = &out.trace {
        write_trace(&dir.join("trace.csv"), trace, *clones)?;
    }
    if let Some(history) = &out.history {
        write_history(&dir.join("history.csv"), history)?;
    }
    if let Some(circuit) = &out.circuit {
        std::fs::write(dir.join("circuit.json"), circuit.clone() + "\n")?;
    }
    Ok(report)
}
