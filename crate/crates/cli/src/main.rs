//! `vqclone`: run, sweep and reproduce variational cloning experiments.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 configuration error, 3 numerical
//! abort.

mod config;
mod error;
mod output;
mod presets;
mod run;
mod sweep;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use config::ExperimentConfig;
use error::CliError;
use output::RunReport;

#[derive(Parser)]
#[command(name = "vqclone", version, about = "Variational quantum cloning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run { config: PathBuf },
    /// Run a config once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// Dotted config path, e.g. `train.learning_rate`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Runs executed in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a named experiment.
    Reproduce {
        /// One of: pc-fixed, pc-1to2, p1-attack, p2-attacks, mton-1to3,
        /// mton-2to4, oracles, sample-planner.
        id: String,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn run_into(cfg: &ExperimentConfig, dir: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let out = run::execute(cfg)?;
    output::write_outputs(dir, cfg, &out, start.elapsed().as_secs_f64())
}

fn run_one(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = output::output_dir(cfg);
    let report = run_into(cfg, &dir)?;
    println!("{}", dir.join("report.json").display());
    println!("hash {}", report.hash);
    Ok(())
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn write_sweep_csv(path: &Path, param: &str, rows: &[(Value, RunReport)]) -> Result<(), CliError> {
    let keys: BTreeSet<&String> = rows
        .iter()
        .flat_map(|(_, r)| r.metrics.iter().filter(|(_, v)| scalar_text(v).is_some()).map(|(k, _)| k))
        .collect();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![param.to_string(), "hash".to_string(), "wall_time_s".to_string()];
    header.extend(keys.iter().map(|k| k.to_string()));
    w.write_record(&header)?;
    for (value, report) in rows {
        let mut rec = vec![sweep::value_label(value), report.hash.clone(), format!("{:.3}", report.wall_time_s)];
        rec.extend(keys.iter().map(|k| report.metrics.get(*k).and_then(scalar_text).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(base: &ExperimentConfig, param: &str, values: &str, jobs: usize) -> Result<(), CliError> {
    let values = sweep::parse_values(values)?;
    // Build every config first so a bad value fails before any work starts.
    let configs = values.iter().map(|v| sweep::with_param(base, param, v)).collect::<Result<Vec<_>, _>>()?;
    let root = output::output_dir(base);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let reports = pool.install(|| {
        configs
            .par_iter()
            .zip(values.par_iter())
            .map(|(cfg, v)| run_into(cfg, &root.join(format!("{param}={}", sweep::value_label(v)))))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows: Vec<(Value, RunReport)> = values.into_iter().zip(reports).collect();
    let path = root.join("sweep.csv");
    write_sweep_csv(&path, param, &rows)?;
    println!("{}", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => run_one(&load(&config)?),
        Command::Sweep { config, param, values, jobs } => run_sweep(&load(&config)?, &param, &values, jobs),
        Command::Reproduce { id } => {
            let mut cfg = presets::preset(&id)?;
            cfg.output_dir = Some(PathBuf::from("out").join(&id));
            run_one(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vqclone: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
