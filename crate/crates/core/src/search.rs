//! Variable-structure ansatz search: random gate-sequence perturbations,
//! redundancy compression, and inner Adam re-optimization of the angles.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{CloneTask, GatePool, GateSequence};
use crate::cost::{CostKind, CostReport};
use crate::error::{Error, Result};
use crate::rng::{substream, Rng};
use crate::train::{train_on, TrainConfig, TrainTrace};

/// Search hyperparameters. The inner training uses `train` with its epoch
/// count replaced by `epochs_per_iter`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub seq_len: usize,
    pub iterations: usize,
    pub epochs_per_iter: usize,
    /// Gate pool identifier (`G_PC`, `G_P1`, `NN<n>`, `FC<n>`).
    pub pool: String,
    pub seed: u64,
    /// Keep trained angles at unperturbed positions (otherwise re-draw all).
    pub warm_start: bool,
    /// Probability of leaving the sequence unchanged; `None` uses 2^{-l}.
    pub d0_mass: Option<f64>,
    pub train: TrainConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seq_len: 35,
            iterations: 50,
            epochs_per_iter: 100,
            pool: "G_PC".into(),
            seed: 0,
            warm_start: true,
            d0_mass: None,
            train: TrainConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 || self.iterations == 0 || self.epochs_per_iter == 0 {
            return Err(Error::InvalidArgument("seq_len, iterations and epochs_per_iter must be at least 1".into()));
        }
        if let Some(m) = self.d0_mass {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::InvalidArgument(format!("d0_mass={m} outside [0,1)")));
            }
        }
        GatePool::by_name(&self.pool)?;
        self.train.validate()
    }
}

/// Outcome of one search run.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_seq: GateSequence,
    pub best_theta: Vec<f64>,
    /// Training-set cost of the best circuit.
    pub best_cost: f64,
    pub best_report: CostReport,
    pub test_report: Option<CostReport>,
    /// Training trace of the iteration that produced the best circuit.
    pub best_trace: TrainTrace,
    /// Best cost after each iteration (non-increasing).
    pub cost_history: Vec<f64>,
    /// Iterations whose candidate replaced the best.
    pub accepted: usize,
}

/// Draws the number of gates to change: Pr(d) = 2^{-d} for 1 ≤ d ≤ l and the
/// remaining 2^{-l} on d = 0, or an explicit `d0_mass` with the d ≥ 1 masses
/// rescaled proportionally.
pub fn draw_d(l: usize, d0_mass: Option<f64>, rng: &mut Rng) -> usize {
    let tail = 0.5f64.powi(l as i32);
    let scale = match d0_mass {
        Some(m) => (1.0 - m) / (1.0 - tail),
        None => 1.0,
    };
    let mut u: f64 = rng.random();
    for d in 1..=l {
        let p = scale * 0.5f64.powi(d as i32);
        if u < p {
            return d;
        }
        u -= p;
    }
    0
}

fn random_angle(rng: &mut Rng) -> f64 {
    rng.random_range(0.0..2.0 * PI)
}

/// Replaces `d` uniformly chosen positions (d from [`draw_d`]) with uniformly
/// chosen pool gates; new rotations get fresh random angles.
pub fn perturb(
    seq: &GateSequence,
    theta: &[f64],
    d0_mass: Option<f64>,
    rng: &mut Rng,
) -> (GateSequence, Vec<f64>, usize) {
    let l = seq.len();
    if l == 0 {
        return (seq.clone(), theta.to_vec(), 0);
    }
    let d = draw_d(l, d0_mass, rng);
    let pool = seq.pool().clone();
    let mut g = seq.indices().to_vec();
    let mut t = theta.to_vec();
    for pos in sample_indices(rng, l, d) {
        g[pos] = rng.random_range(0..pool.len());
        t[pos] = if pool.gates[g[pos]].parameterized() { random_angle(rng) } else { 0.0 };
    }
    (GateSequence::new(pool, g).expect("indices drawn from the pool"), t, d)
}

/// Wraps an angle into (−π, π].
fn wrap(a: f64) -> f64 {
    let w = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Removes redundancy without changing the unitary (up to global phase):
/// a rotation is merged into the next gate of the same kind on the same qubit
/// when no gate in between touches that qubit; such CZ pairs cancel; rotations
/// with angle ≡ 0 (mod 2π) are dropped. Returns the reduced circuit.
pub fn reduce(seq: &GateSequence, theta: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let pool = seq.pool();
    let mut g = seq.indices().to_vec();
    let mut t = theta.to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < g.len() {
            let a = &pool.gates[g[i]];
            let partner = (i + 1..g.len()).find(|&j| pool.gates[g[j]].overlaps(a));
            if let Some(j) = partner {
                if g[j] == g[i] {
                    if a.parameterized() {
                        t[i] = wrap(t[i] + t[j]);
                        g.remove(j);
                        t.remove(j);
                    } else {
                        g.remove(j);
                        t.remove(j);
                        g.remove(i);
                        t.remove(i);
                    }
                    changed = true;
                    continue;
                }
            }
            i += 1;
        }
        let before = g.len();
        let keep: Vec<bool> =
            g.iter().zip(&t).map(|(&gi, &ti)| !(pool.gates[gi].parameterized() && wrap(ti).abs() < 1e-9)).collect();
        let mut k = keep.iter();
        g.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        t.retain(|_| *k.next().unwrap());
        changed |= g.len() != before;
        if !changed {
            break;
        }
    }
    (g, t)
}

/// [`reduce`], then appends random rotation gates at angle 0 (identities) to
/// restore the original length, so the compressed circuit has the same cost.
pub fn compress(seq: &GateSequence, theta: &[f64], rng: &mut Rng) -> (GateSequence, Vec<f64>) {
    let pool = seq.pool().clone();
    let (mut g, mut t) = reduce(seq, theta);
    let rotations = pool.rotation_indices();
    while g.len() < seq.len() && !rotations.is_empty() {
        g.push(rotations[rng.random_range(0..rotations.len())]);
        t.push(0.0);
    }
    (GateSequence::new(pool, g).expect("indices from the pool"), t)
}

/// Random sequence of `l` pool gates with random angles.
pub fn random_sequence(pool: Arc<GatePool>, l: usize, rng: &mut Rng) -> (GateSequence, Vec<f64>) {
    let g: Vec<usize> = (0..l).map(|_| rng.random_range(0..pool.len())).collect();
    let t = g.iter().map(|&i| if pool.gates[i].parameterized() { random_angle(rng) } else { 0.0 }).collect();
    (GateSequence::new(pool, g).expect("indices from the pool"), t)
}

/// Runs the structure search: a random initial sequence is trained; each
/// further iteration perturbs the best circuit, compresses it, re-trains it
/// (abandoning it at the patience epoch if it is not within the threshold of
/// the best cost), and replaces the best on strict improvement. The training
/// and test sets are drawn once and shared by all iterations.
pub fn search(task: &CloneTask, kind: CostKind, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    task.validate()?;
    kind.validate(task)?;
    let pool = Arc::new(GatePool::by_name(&cfg.pool)?);
    if pool.num_qubits() > task.total_qubits() {
        return Err(Error::InvalidArgument(format!(
            "pool {} acts on {} qubits but the task has {}",
            pool.name,
            pool.num_qubits(),
            task.total_qubits()
        )));
    }
    let mut tcfg = cfg.train.clone();
    tcfg.epochs = cfg.epochs_per_iter;
    tcfg.seed = cfg.seed;
    let train_set = task.family.sample(tcfg.n_train, &mut substream(cfg.seed, "sampling"));
    let test_set = task.family.sample(tcfg.n_test, &mut substream(cfg.seed, "test-sampling"));
    let mut init_rng = substream(cfg.seed, "init");
    let mut pert_rng = substream(cfg.seed, "perturbation");

    let (seq0, theta0) = random_sequence(pool.clone(), cfg.seq_len, &mut init_rng);
    let (seq0, theta0) = compress(&seq0, &theta0, &mut pert_rng);
    tcfg.reference_cost = None;
    let first = train_on(task, &seq0, &theta0, kind, &tcfg, &train_set, &test_set)?;
    let mut best = SearchResult {
        best_seq: seq0,
        best_theta: first.theta,
        best_cost: first.train_report.value,
        best_report: first.train_report,
        test_report: first.test_report,
        best_trace: first.trace,
        cost_history: Vec::with_capacity(cfg.iterations),
        accepted: 1,
    };
    best.cost_history.push(best.best_cost);

    for _ in 1..cfg.iterations {
        let (seq, mut theta, _) = perturb(&best.best_seq, &best.best_theta, cfg.d0_mass, &mut pert_rng);
        if !cfg.warm_start {
            for p in seq.parameterized_positions() {
                theta[p] = random_angle(&mut pert_rng);
            }
        }
        let (seq, theta) = compress(&seq, &theta, &mut pert_rng);
        tcfg.reference_cost = Some(best.best_cost);
        let out = train_on(task, &seq, &theta, kind, &tcfg, &train_set, &test_set)?;
        if out.train_report.value < best.best_cost {
            best.best_seq = seq;
            best.best_theta = out.theta;
            best.best_cost = out.train_report.value;
            best.best_report = out.train_report;
            best.test_report = out.test_report;
            best.best_trace = out.trace;
            best.accepted += 1;
        }
        best.cost_history.push(best.best_cost);
    }
    Ok(best)
}
