//! Executes one configured experiment and collects its metrics.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::Rng as _;
use serde_json::{json, Value};
use vqclone_core::attack::{attack_p1, attack_p2_global, attack_p2_local_2state_bounds, attack_p2_local_4state};
use vqclone_core::circuit::{ideal_cloning_ansatz, parse_circuit, serialize_circuit};
use vqclone_core::families::{
    optimal_global_fixed_overlap, optimal_global_universal, optimal_local_fixed_overlap, optimal_local_universal,
    optimal_phase_covariant,
};
use vqclone_core::rng::substream;
use vqclone_core::search::{random_sequence, search};
use vqclone_core::train::{plan_samples, swap_test_coverage, train};
use vqclone_core::{
    AttackReport, CloneTask, ClonerHandle, CostReport, GatePool, GateSequence, SearchResult, StateFamily, TrainTrace,
};

use crate::config::{CircuitSource, ClonerSource, ExperimentConfig, Mode, Protocol};
use crate::error::CliError;

pub type Metrics = BTreeMap<String, Value>;

/// Everything a run produces besides the wall time.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub metrics: Metrics,
    /// Per-epoch training trace and the number of clones it reports.
    pub trace: Option<(TrainTrace, usize)>,
    /// Serialized best circuit.
    pub circuit: Option<String>,
    /// Best cost after each search iteration.
    pub history: Option<Vec<f64>>,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let out = match cfg.mode {
        Mode::Train => run_train(cfg)?,
        Mode::Search => run_search(cfg)?,
        Mode::Attack => run_attack(cfg)?,
        Mode::Oracles => run_oracles()?,
        Mode::Planner => run_planner(cfg)?,
    };
    for (k, v) in &out.metrics {
        if let Some(x) = v.as_f64() {
            if !x.is_finite() {
                return Err(CliError::Numerical(format!("metric {k} is {x}")));
            }
        }
    }
    Ok(out)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn cost_metrics(m: &mut Metrics, prefix: &str, report: &CostReport) {
    let f = &report.per_clone_fidelities;
    m.insert(format!("{prefix}cost"), json!(report.value));
    m.insert(format!("{prefix}fidelities"), json!(f));
    m.insert(format!("{prefix}mean_fidelity"), json!(mean(f)));
    m.insert(format!("{prefix}fidelity_spread"), json!(spread(f)));
    m.insert(format!("{prefix}global_fidelity"), json!(report.global_fidelity));
}

fn initial_circuit(cfg: &ExperimentConfig, task: &CloneTask) -> Result<(GateSequence, Vec<f64>, Vec<usize>), CliError> {
    let mut rng = substream(cfg.seed, "init");
    let (seq, theta, frozen) = match &cfg.circuit {
        CircuitSource::Ideal => {
            if task.total_qubits() != 3 {
                return Err(CliError::Config("the ideal network needs a 3-qubit task (1 -> 2, one ancilla)".into()));
            }
            let (seq, mut theta, trainable) = ideal_cloning_ansatz();
            for &p in &trainable {
                theta[p] = rng.random_range(0.0..2.0 * PI);
            }
            let frozen = (0..seq.len()).filter(|p| !trainable.contains(p)).collect();
            (seq, theta, frozen)
        }
        CircuitSource::Random { pool, length } => {
            let (seq, theta) = random_sequence(Arc::new(GatePool::by_name(pool)?), *length, &mut rng);
            (seq, theta, Vec::new())
        }
        CircuitSource::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let (seq, theta) = parse_circuit(&text)?;
            (seq, theta, Vec::new())
        }
    };
    if seq.num_qubits() > task.total_qubits() {
        return Err(CliError::Config(format!(
            "circuit acts on {} qubits but the task has {}",
            seq.num_qubits(),
            task.total_qubits()
        )));
    }
    Ok((seq, theta, frozen))
}

fn run_train(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let task = cfg.task.build()?;
    let (seq, theta0, frozen) = initial_circuit(cfg, &task)?;
    let mut tcfg = cfg.train_config();
    tcfg.frozen.extend(frozen);
    let out = train(&task, &seq, &theta0, cfg.cost, &tcfg)?;
    let mut m = Metrics::new();
    cost_metrics(&mut m, "train_", &out.train_report);
    if let Some(t) = &out.test_report {
        cost_metrics(&mut m, "test_", t);
    }
    m.insert("epochs_run".into(), json!(out.trace.len()));
    m.insert("stopped_early".into(), json!(out.stopped_early));
    Ok(RunOutput {
        metrics: m,
        trace: Some((out.trace, task.n_out)),
        circuit: Some(serialize_circuit(&seq, &out.theta)?),
        history: None,
    })
}

/// Best of `cfg.runs` searches by training cost.
fn best_search(cfg: &ExperimentConfig, task: &CloneTask) -> Result<(SearchResult, u64, Vec<f64>), CliError> {
    let mut best: Option<(SearchResult, u64)> = None;
    let mut costs = Vec::new();
    for i in 0..cfg.runs {
        let scfg = cfg.search_config(i);
        let res = search(task, cfg.cost, &scfg)?;
        costs.push(res.best_cost);
        if best.as_ref().is_none_or(|(b, _)| res.best_cost < b.best_cost) {
            best = Some((res, scfg.seed));
        }
    }
    let (res, seed) = best.expect("runs >= 1");
    Ok((res, seed, costs))
}

fn search_output(task: &CloneTask, res: SearchResult, seed: u64, costs: Vec<f64>) -> Result<RunOutput, CliError> {
    let mut m = Metrics::new();
    cost_metrics(&mut m, "train_", &res.best_report);
    if let Some(t) = &res.test_report {
        cost_metrics(&mut m, "test_", t);
    }
    m.insert("best_seed".into(), json!(seed));
    m.insert("run_costs".into(), json!(costs));
    m.insert("accepted".into(), json!(res.accepted));
    m.insert("circuit_length".into(), json!(res.best_seq.len()));
    Ok(RunOutput {
        metrics: m,
        circuit: Some(serialize_circuit(&res.best_seq, &res.best_theta)?),
        trace: Some((res.best_trace, task.n_out)),
        history: Some(res.cost_history),
    })
}

fn run_search(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let task = cfg.task.build()?;
    let (res, seed, costs) = best_search(cfg, &task)?;
    search_output(&task, res, seed, costs)
}

fn attack_metrics(m: &mut Metrics, prefix: &str, r: &AttackReport) {
    m.insert(format!("{prefix}p_disc"), json!(r.p_disc));
    m.insert(format!("{prefix}bias"), json!(r.bias));
    m.insert(format!("{prefix}p_succ_overall"), json!(r.p_succ_overall));
    if r.protocol == "P1" {
        m.insert(format!("{prefix}p_detect"), json!(r.p_detect));
        m.insert(format!("{prefix}p_detect_aggregate"), json!(r.p_detect_aggregate));
    }
    if let Some(f) = r.returned_fidelity {
        m.insert(format!("{prefix}returned_fidelity"), json!(f));
    }
}

fn attack_all(m: &mut Metrics, prefix: &str, cfg: &ExperimentConfig, cloner: &ClonerHandle) -> Result<(), CliError> {
    let family = &cfg.task.family;
    match cfg.attack.protocol {
        Protocol::P1 => attack_metrics(m, prefix, &attack_p1(cloner, family, cfg.attack.rounds)?),
        Protocol::P2 => {
            attack_metrics(m, &format!("{prefix}I_"), &attack_p2_global(cloner, family)?);
            attack_metrics(m, &format!("{prefix}II_"), &attack_p2_local_4state(cloner, family)?);
        }
    }
    Ok(())
}

fn run_attack(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut m = Metrics::new();
    attack_all(&mut m, "ideal_", cfg, &ClonerHandle::Analytic)?;
    if let (Protocol::P2, StateFamily::CoinFlip4 { phi }) = (cfg.attack.protocol, &cfg.task.family) {
        let s = (2.0 * phi).sin();
        let (lo, hi) = attack_p2_local_2state_bounds(optimal_local_fixed_overlap(s)?, s)?;
        m.insert("two_state_bound_low".into(), json!(lo));
        m.insert("two_state_bound_high".into(), json!(hi));
    }
    if cfg.attack.cloner == ClonerSource::Analytic {
        return Ok(RunOutput { metrics: m, ..Default::default() });
    }
    let task = cfg.task.build()?;
    let (res, seed, costs) = best_search(cfg, &task)?;
    let cloner = ClonerHandle::Learned { task: task.clone(), seq: res.best_seq.clone(), theta: res.best_theta.clone() };
    attack_all(&mut m, "learned_", cfg, &cloner)?;
    let mut out = search_output(&task, res, seed, costs)?;
    for (k, v) in out.metrics {
        m.insert(format!("cloner_{k}"), v);
    }
    out.metrics = m;
    Ok(out)
}

fn run_oracles() -> Result<RunOutput, CliError> {
    let mut m = Metrics::new();
    let (pc_local, pc_global) = optimal_phase_covariant();
    m.insert("universal_local_1_2".into(), json!(optimal_local_universal(1, 2)?));
    m.insert("universal_local_1_3".into(), json!(optimal_local_universal(1, 3)?));
    m.insert("universal_local_2_4".into(), json!(optimal_local_universal(2, 4)?));
    m.insert("universal_global_1_2".into(), json!(optimal_global_universal(1, 2)?));
    m.insert("phase_covariant_local".into(), json!(pc_local));
    m.insert("phase_covariant_global".into(), json!(pc_global));
    m.insert("fixed_overlap_local_half".into(), json!(optimal_local_fixed_overlap(0.5)?));
    m.insert("fixed_overlap_local_cos_pi_9".into(), json!(optimal_local_fixed_overlap((PI / 9.0).cos())?));
    m.insert("fixed_overlap_local_inv_sqrt2".into(), json!(optimal_local_fixed_overlap(FRAC_1_SQRT_2)?));
    m.insert("fixed_overlap_global_inv_sqrt2".into(), json!(optimal_global_fixed_overlap(FRAC_1_SQRT_2, 1, 2)?));
    Ok(RunOutput { metrics: m, ..Default::default() })
}

fn run_planner(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let p = &cfg.planner;
    let plan = plan_samples(p.gamma, p.delta)?;
    let mut m = Metrics::new();
    m.insert("total_samples".into(), json!(plan.total_samples));
    let mut coverage = Vec::new();
    for &o in &p.overlaps {
        coverage.push(json!({ "overlap": o, "coverage": swap_test_coverage(o, &plan, p.trials, cfg.seed)? }));
    }
    m.insert("coverage".into(), Value::Array(coverage));
    Ok(RunOutput { metrics: m, ..Default::default() })
}
