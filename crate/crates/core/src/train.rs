//! Adam training of circuit angles, SWAP-test fidelity estimation and the
//! Hoeffding sample planner.

use serde::{Deserialize, Serialize};

use rand::seq::index::sample as sample_indices;

use crate::circuit::{CloneTask, GateSequence};
use crate::cost::{evaluate, swap_test_overlap, value_and_grad_with, Batch, CostKind, CostReport, Estimator};
use crate::error::{Error, Result};
use crate::families::StateSample;
use crate::qmath::{DensityMatrix, PureState};
use crate::rng::substream;

/// How fidelities are estimated during training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EstimatorConfig {
    #[default]
    Exact,
    /// `shots` simulated SWAP tests per sample and per fidelity.
    Shots { shots: usize },
}

/// Hyperparameters of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub epochs: usize,
    /// Mini-batch size; `None` uses the whole training set every epoch.
    pub batch_size: Option<usize>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub estimator: EstimatorConfig,
    /// Epoch at which an unpromising run is abandoned.
    pub patience: usize,
    /// A run is abandoned at `patience` if its best cost exceeds
    /// `reference_cost + threshold`.
    pub threshold: f64,
    /// Best-known cost for the early-stop rule; `None` disables it.
    pub reference_cost: Option<f64>,
    /// Positions whose angles are held fixed.
    pub frozen: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            epochs: 100,
            batch_size: None,
            n_train: 40,
            n_test: 10,
            seed: 0,
            estimator: EstimatorConfig::Exact,
            patience: 30,
            threshold: 0.02,
            reference_cost: None,
            frozen: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate={} must be positive", self.learning_rate));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("Adam betas must lie in [0,1)".into());
        }
        if !(self.eps_adam > 0.0) {
            return bad("eps_adam must be positive".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.n_train == 0 {
            return bad("n_train must be at least 1".into());
        }
        if self.batch_size == Some(0) {
            return bad("batch_size must be at least 1".into());
        }
        if let EstimatorConfig::Shots { shots: 0 } = self.estimator {
            return bad("shots must be at least 1".into());
        }
        Ok(())
    }
}

/// Adam optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }
}

/// One bias-corrected Adam update of the positions marked `trainable`.
pub fn adam_step(
    theta: &mut [f64],
    grad: &[f64],
    state: &mut AdamState,
    cfg: &TrainConfig,
    trainable: &[bool],
) -> Result<()> {
    let n = theta.len();
    if grad.len() != n || state.m.len() != n || trainable.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: grad.len().min(state.m.len()).min(trainable.len()) });
    }
    state.t += 1;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    for i in (0..n).filter(|&i| trainable[i]) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps_adam);
    }
    Ok(())
}

/// Costs and fidelities at the start of one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub cost_train: f64,
    pub cost_test: Option<f64>,
    pub fidelities: Vec<f64>,
}

/// Per-epoch history of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV header: epoch, cost_train, cost_test, F_clone_1..N.
    pub fn csv_header(num_clones: usize) -> Vec<String> {
        let mut h = vec!["epoch".to_string(), "cost_train".into(), "cost_test".into()];
        h.extend((1..=num_clones).map(|j| format!("F_clone_{j}")));
        h
    }

    /// CSV rows matching [`TrainTrace::csv_header`]; a missing test cost is empty.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.epoch.to_string(),
                    r.cost_train.to_string(),
                    r.cost_test.map(|c| c.to_string()).unwrap_or_default(),
                ];
                row.extend(r.fidelities.iter().map(|f| f.to_string()));
                row
            })
            .collect()
    }
}

/// Result of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Angles with the lowest training cost seen.
    pub theta: Vec<f64>,
    /// Training-set report at `theta`.
    pub train_report: CostReport,
    /// Test-set report at `theta` (None without a test set).
    pub test_report: Option<CostReport>,
    pub trace: TrainTrace,
    pub stopped_early: bool,
}

/// Trains from `theta0`, drawing `n_train` training and `n_test` test samples
/// from the task's family.
pub fn train(
    task: &CloneTask,
    seq: &GateSequence,
    theta0: &[f64],
    kind: CostKind,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_set = task.family.sample(cfg.n_train, &mut substream(cfg.seed, "sampling"));
    let test_set = task.family.sample(cfg.n_test, &mut substream(cfg.seed, "test-sampling"));
    train_on(task, seq, theta0, kind, cfg, &train_set, &test_set)
}

/// Trains on given training and test sets.
///
/// Each epoch evaluates the cost and parameter-shift gradient on a mini-batch
/// (the full training set by default), records the training cost at the
/// current angles, and takes one Adam step. The angles with the lowest
/// recorded training cost are returned; the final angles are also scored.
pub fn train_on(
    task: &CloneTask,
    seq: &GateSequence,
    theta0: &[f64],
    kind: CostKind,
    cfg: &TrainConfig,
    train_set: &[StateSample],
    test_set: &[StateSample],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if theta0.len() != seq.len() {
        return Err(Error::LengthMismatch { expected: seq.len(), got: theta0.len() });
    }
    let full = Batch::new(train_set)?;
    let test = if test_set.is_empty() { None } else { Some(Batch::new(test_set)?) };
    let mut trainable = vec![false; seq.len()];
    for p in seq.parameterized_positions() {
        trainable[p] = true;
    }
    for &p in &cfg.frozen {
        if p >= seq.len() {
            return Err(Error::InvalidArgument(format!("frozen position {p} beyond sequence length {}", seq.len())));
        }
        trainable[p] = false;
    }
    let mut theta = theta0.to_vec();
    seq.sanitize(&mut theta);
    let mut adam = AdamState::new(seq.len());
    let mut batch_rng = substream(cfg.seed, "minibatch");
    let mut shot_rng = substream(cfg.seed, "shots");
    let minibatch = cfg.batch_size.filter(|&b| b < train_set.len());

    let mut trace = TrainTrace::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stopped_early = false;
    for epoch in 0..cfg.epochs {
        let mut est = match cfg.estimator {
            EstimatorConfig::Exact => Estimator::Exact,
            EstimatorConfig::Shots { shots } => Estimator::Shots { shots, rng: &mut shot_rng },
        };
        let (report, grad) = match minibatch {
            None => value_and_grad_with(kind, task, seq, &theta, &full, &mut est)?,
            Some(b) => {
                let picked: Vec<StateSample> = sample_indices(&mut batch_rng, train_set.len(), b)
                    .into_iter()
                    .map(|i| train_set[i].clone())
                    .collect();
                let (_, g) = value_and_grad_with(kind, task, seq, &theta, &Batch::new(&picked)?, &mut est)?;
                (evaluate(kind, task, seq, &theta, &full)?, g)
            }
        };
        let cost_test = match &test {
            Some(t) => Some(evaluate(kind, task, seq, &theta, t)?.value),
            None => None,
        };
        trace.records.push(EpochRecord {
            epoch,
            cost_train: report.value,
            cost_test,
            fidelities: report.per_clone_fidelities.clone(),
        });
        if best.as_ref().is_none_or(|(c, _)| report.value < *c) {
            best = Some((report.value, theta.clone()));
        }
        if let Some(reference) = cfg.reference_cost {
            let best_cost = best.as_ref().map(|(c, _)| *c).unwrap_or(f64::INFINITY);
            if epoch + 1 == cfg.patience && best_cost > reference + cfg.threshold {
                stopped_early = true;
                break;
            }
        }
        adam_step(&mut theta, &grad, &mut adam, cfg, &trainable)?;
    }
    if !stopped_early {
        let last = evaluate(kind, task, seq, &theta, &full)?;
        if best.as_ref().is_none_or(|(c, _)| last.value < *c) {
            best = Some((last.value, theta.clone()));
        }
    }
    let (_, theta) = best.expect("at least one epoch ran");
    let train_report = evaluate(kind, task, seq, &theta, &full)?;
    let test_report = match &test {
        Some(t) => Some(evaluate(kind, task, seq, &theta, t)?),
        None => None,
    };
    Ok(TrainOutcome { theta, train_report, test_report, trace, stopped_early })
}

/// Simulated SWAP-test estimate of ⟨ψ|ρ|ψ⟩ from `shots` Bernoulli outcomes.
pub fn swap_test_estimate(pure: &PureState, rho: &DensityMatrix, shots: usize, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if pure.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(pure.dim(), rho.dim()));
    }
    Ok(swap_test_overlap(rho.overlap(pure), shots, &mut substream(seed, "shots")))
}

/// Number of samples guaranteeing additive error `gamma` with probability
/// at least 1 − `delta`: ⌈ln(2/δ) / (2γ²)⌉.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub gamma: f64,
    pub delta: f64,
    pub total_samples: usize,
}

pub fn plan_samples(gamma: f64, delta: f64) -> Result<SamplePlan> {
    if !(gamma > 0.0 && gamma < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("need gamma, delta in (0,1), got {gamma}, {delta}")));
    }
    let total = ((2.0 / delta).ln() / (2.0 * gamma * gamma)).ceil() as usize;
    Ok(SamplePlan { gamma, delta, total_samples: total })
}

/// Fraction of `trials` SWAP-test estimates of `overlap`, each using the
/// planned number of shots, that land within γ of the truth.
pub fn swap_test_coverage(overlap: f64, plan: &SamplePlan, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = substream(seed, "calibration");
    let hits = (0..trials)
        .filter(|_| (swap_test_overlap(overlap, plan.total_samples, &mut rng) - overlap).abs() <= plan.gamma)
        .count();
    Ok(hits as f64 / trials as f64)
}
