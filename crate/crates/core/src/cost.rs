//! Cloning cost functions, their parameter-shift gradients, a
//! finite-difference oracle, and the faithfulness and sandwich bounds.
//!
//! Every cost is an expectation over a batch of input states of a function of
//! the clone fidelities. Because the circuit output is pure, all fidelities are
//! computed directly from the output state vector: a local fidelity by
//! contracting one register with ⟨ψ|, the global fidelity by projecting every
//! clone register onto ⟨ψ| in turn (ancillas are traced implicitly).

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_gate, simulate, CloneTask, GateSequence, GateSpec};
use crate::error::{Error, Result};
use crate::families::{asym_fidelity_pair, StateFamily, StateSample};
use crate::qmath::{PureState, C64};
use crate::rng::{substream, Rng};

/// Which cost to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CostKind {
    /// 1 − (1/N) Σ_j F_j.
    Local,
    /// Σ_i (1 − F_i)² + Σ_{i<j} (F_i − F_j)².
    Squared,
    /// 1 − F_G on the joint clone state.
    Global,
    /// (F_B^p − F_B)² + (F_E^p − F_E)² with targets of the no-cloning bound.
    Asymmetric { p: f64 },
}

impl CostKind {
    pub fn name(&self) -> &'static str {
        match self {
            CostKind::Local => "local",
            CostKind::Squared => "squared",
            CostKind::Global => "global",
            CostKind::Asymmetric { .. } => "asymmetric",
        }
    }

    /// Checks the kind's parameters and its compatibility with a task.
    pub fn validate(&self, task: &CloneTask) -> Result<()> {
        if let CostKind::Asymmetric { p } = *self {
            asym_fidelity_pair(p)?;
            if task.n_out != 2 {
                return Err(Error::InvalidArgument(format!("asymmetric cost needs N = 2, got N = {}", task.n_out)));
            }
        }
        Ok(())
    }
}

/// Result of one cost evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kind: CostKind,
    pub value: f64,
    /// Batch-mean local fidelity of each clone register.
    pub per_clone_fidelities: Vec<f64>,
    /// Batch-mean global fidelity of the clone registers.
    pub global_fidelity: f64,
    pub batch_size: usize,
}

/// Input states of one cost evaluation, with duplicates merged.
#[derive(Clone, Debug)]
pub struct Batch {
    states: Vec<PureState>,
    counts: Vec<usize>,
    size: usize,
}

impl Batch {
    pub fn new(samples: &[StateSample]) -> Result<Self> {
        let states: Vec<PureState> = samples.iter().map(|s| s.state.clone()).collect();
        Self::from_states(&states)
    }

    pub fn from_states(states: &[PureState]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let mut distinct: Vec<PureState> = Vec::new();
        let mut counts = Vec::new();
        for s in states {
            if s.num_qubits() != 1 {
                return Err(Error::DimensionMismatch(s.dim(), 2));
            }
            match distinct.iter().position(|d| d.amplitudes() == s.amplitudes()) {
                Some(i) => counts[i] += 1,
                None => {
                    distinct.push(s.clone());
                    counts.push(1);
                }
            }
        }
        Ok(Self { states: distinct, counts, size: states.len() })
    }

    /// Number of samples, counting duplicates.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Distinct states with their multiplicities.
    pub fn entries(&self) -> impl Iterator<Item = (&PureState, usize)> {
        self.states.iter().zip(self.counts.iter().copied())
    }
}

/// How fidelities are obtained: exactly, or from simulated SWAP tests.
pub enum Estimator<'a> {
    Exact,
    /// `shots` SWAP tests per sample and per fidelity.
    Shots {
        shots: usize,
        rng: &'a mut Rng,
    },
}

impl Estimator<'_> {
    fn estimate(&mut self, fidelity: f64, multiplicity: usize) -> f64 {
        match self {
            Estimator::Exact => fidelity,
            Estimator::Shots { shots, rng } => swap_test_overlap(fidelity, *shots * multiplicity, rng),
        }
    }
}

/// Simulated SWAP test: outcome `1` occurs with probability ½(1 − overlap);
/// returns the overlap estimate 1 − 2·(ones/shots).
pub fn swap_test_overlap(overlap: f64, shots: usize, rng: &mut Rng) -> f64 {
    if shots == 0 {
        return overlap;
    }
    let p_one = (0.5 * (1.0 - overlap)).clamp(0.0, 1.0);
    let ones = (0..shots).filter(|_| rng.random::<f64>() < p_one).count();
    1.0 - 2.0 * ones as f64 / shots as f64
}

/// Clone fidelities for one input state.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleFidelities {
    pub local: Vec<f64>,
    pub global: f64,
}

/// ⟨ψ|ρ_q|ψ⟩ for register `q` of the pure output `out`.
pub fn local_fidelity(out: &[C64], psi: &PureState, q: usize, num_qubits: usize) -> f64 {
    let (p0, p1) = (psi.amplitudes()[0].conj(), psi.amplitudes()[1].conj());
    let mask = 1usize << (num_qubits - 1 - q);
    let mut total = 0.0;
    for i in 0..out.len() {
        if i & mask == 0 {
            total += (p0 * out[i] + p1 * out[i | mask]).norm_sqr();
        }
    }
    total
}

/// ⟨ψ^{⊗N}|ρ_clones|ψ^{⊗N}⟩ with every other qubit traced out.
pub fn global_fidelity(out: &[C64], psi: &PureState, registers: &[usize], num_qubits: usize) -> f64 {
    let (p0, p1) = (psi.amplitudes()[0].conj(), psi.amplitudes()[1].conj());
    let mut regs = registers.to_vec();
    regs.sort_unstable_by(|a, b| b.cmp(a));
    let mut v = out.to_vec();
    let mut n = num_qubits;
    // removing the highest index first leaves lower indices in place
    for q in regs {
        let shift = n - 1 - q;
        let low_mask = (1usize << shift) - 1;
        let mut next = vec![C64::new(0.0, 0.0); v.len() / 2];
        for (i, slot) in next.iter_mut().enumerate() {
            let i0 = ((i >> shift) << (shift + 1)) | (i & low_mask);
            *slot = p0 * v[i0] + p1 * v[i0 | (1 << shift)];
        }
        v = next;
        n -= 1;
    }
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn output_fidelities(out: &[C64], psi: &PureState, task: &CloneTask) -> SampleFidelities {
    let n = task.total_qubits();
    SampleFidelities {
        local: task.clone_registers.iter().map(|&q| local_fidelity(out, psi, q, n)).collect(),
        global: global_fidelity(out, psi, &task.clone_registers, n),
    }
}

/// Exact clone fidelities of the circuit on one input state.
pub fn sample_fidelities(
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    psi: &PureState,
) -> Result<SampleFidelities> {
    let n = task.total_qubits();
    seq.check(theta, n)?;
    let input = task.prepare_input(psi)?;
    let out = simulate(seq, theta, input.amplitudes(), n);
    Ok(output_fidelities(&out, psi, task))
}

/// Per-sample cost as a function of the clone fidelities.
pub fn cost_from_fidelities(kind: CostKind, f: &SampleFidelities) -> f64 {
    match kind {
        CostKind::Local => 1.0 - f.local.iter().sum::<f64>() / f.local.len() as f64,
        CostKind::Global => 1.0 - f.global,
        CostKind::Squared => {
            let mut c: f64 = f.local.iter().map(|x| (1.0 - x).powi(2)).sum();
            for i in 0..f.local.len() {
                for j in i + 1..f.local.len() {
                    c += (f.local[i] - f.local[j]).powi(2);
                }
            }
            c
        }
        CostKind::Asymmetric { p } => {
            let (tb, te) = asym_fidelity_pair(p).unwrap_or((f64::NAN, f64::NAN));
            (tb - f.local[0]).powi(2) + (te - f.local[1]).powi(2)
        }
    }
}

/// Chain rule: derivative of the per-sample cost given fidelity derivatives.
fn cost_derivative(kind: CostKind, f: &SampleFidelities, d: &SampleFidelities) -> f64 {
    match kind {
        CostKind::Local => -d.local.iter().sum::<f64>() / d.local.len() as f64,
        CostKind::Global => -d.global,
        CostKind::Squared => {
            let mut g: f64 = f.local.iter().zip(&d.local).map(|(x, dx)| -2.0 * (1.0 - x) * dx).sum();
            for i in 0..f.local.len() {
                for j in i + 1..f.local.len() {
                    g += 2.0 * (f.local[i] - f.local[j]) * (d.local[i] - d.local[j]);
                }
            }
            g
        }
        CostKind::Asymmetric { p } => {
            let (tb, te) = asym_fidelity_pair(p).unwrap_or((f64::NAN, f64::NAN));
            -2.0 * (tb - f.local[0]) * d.local[0] - 2.0 * (te - f.local[1]) * d.local[1]
        }
    }
}

struct Accumulator {
    value: f64,
    local: Vec<f64>,
    global: f64,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self { value: 0.0, local: vec![0.0; n], global: 0.0 }
    }

    fn add(&mut self, kind: CostKind, f: &SampleFidelities, w: f64) {
        self.value += w * cost_from_fidelities(kind, f);
        for (a, x) in self.local.iter_mut().zip(&f.local) {
            *a += w * x;
        }
        self.global += w * f.global;
    }

    fn finish(self, kind: CostKind, batch_size: usize) -> Result<CostReport> {
        if !self.value.is_finite() {
            return Err(Error::Numerical(format!("{} cost evaluated to {}", kind.name(), self.value)));
        }
        Ok(CostReport {
            kind,
            value: self.value,
            per_clone_fidelities: self.local,
            global_fidelity: self.global,
            batch_size,
        })
    }
}

fn estimate_all(f: SampleFidelities, est: &mut Estimator<'_>, count: usize) -> SampleFidelities {
    SampleFidelities {
        local: f.local.into_iter().map(|x| est.estimate(x, count)).collect(),
        global: est.estimate(f.global, count),
    }
}

fn precheck(kind: CostKind, task: &CloneTask, seq: &GateSequence, theta: &[f64]) -> Result<()> {
    task.validate()?;
    kind.validate(task)?;
    seq.check(theta, task.total_qubits())
}

/// Cost value with the chosen fidelity estimator.
pub fn evaluate_with(
    kind: CostKind,
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
    est: &mut Estimator<'_>,
) -> Result<CostReport> {
    precheck(kind, task, seq, theta)?;
    let n = task.total_qubits();
    let mut acc = Accumulator::new(task.n_out);
    for (psi, count) in batch.entries() {
        let input = task.prepare_input(psi)?;
        let out = simulate(seq, theta, input.amplitudes(), n);
        let f = estimate_all(output_fidelities(&out, psi, task), est, count);
        acc.add(kind, &f, count as f64 / batch.len() as f64);
    }
    acc.finish(kind, batch.len())
}

/// Exact cost value.
pub fn evaluate(
    kind: CostKind,
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
) -> Result<CostReport> {
    evaluate_with(kind, task, seq, theta, batch, &mut Estimator::Exact)
}

/// Cost value and parameter-shift gradient, using the same batch for every
/// shifted evaluation. For R_P(θ) = exp(−iθP/2) each fidelity obeys
/// ∂F/∂θ_l = ½[F(θ_l + π/2) − F(θ_l − π/2)]; cost gradients follow by the chain
/// rule. Unparameterized positions get exactly 0.
pub fn value_and_grad_with(
    kind: CostKind,
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
    est: &mut Estimator<'_>,
) -> Result<(CostReport, Vec<f64>)> {
    precheck(kind, task, seq, theta)?;
    let n = task.total_qubits();
    let specs: Vec<&GateSpec> = seq.specs().collect();
    let positions = seq.parameterized_positions();
    let mut grad = vec![0.0; seq.len()];
    let mut acc = Accumulator::new(task.n_out);
    for (psi, count) in batch.entries() {
        let w = count as f64 / batch.len() as f64;
        // prefix[k] is the state after the first k gates
        let mut prefix = Vec::with_capacity(specs.len() + 1);
        prefix.push(task.prepare_input(psi)?.into_amplitudes());
        for (k, spec) in specs.iter().enumerate() {
            let mut next = prefix[k].clone();
            apply_gate(&mut next, spec, theta[k], n);
            prefix.push(next);
        }
        let f = estimate_all(output_fidelities(&prefix[specs.len()], psi, task), est, count);
        acc.add(kind, &f, w);
        for &p in &positions {
            let mut shifted = [0.0, 0.0].map(|_| None);
            for (slot, sign) in shifted.iter_mut().zip([1.0, -1.0]) {
                let mut v = prefix[p].clone();
                apply_gate(&mut v, specs[p], theta[p] + sign * FRAC_PI_2, n);
                for k in p + 1..specs.len() {
                    apply_gate(&mut v, specs[k], theta[k], n);
                }
                *slot = Some(estimate_all(output_fidelities(&v, psi, task), est, count));
            }
            let [Some(plus), Some(minus)] = shifted else { unreachable!() };
            let d = SampleFidelities {
                local: plus.local.iter().zip(&minus.local).map(|(a, b)| 0.5 * (a - b)).collect(),
                global: 0.5 * (plus.global - minus.global),
            };
            grad[p] += w * cost_derivative(kind, &f, &d);
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite gradient".into()));
    }
    Ok((acc.finish(kind, batch.len())?, grad))
}

/// Exact cost value and gradient.
pub fn value_and_grad(
    kind: CostKind,
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
) -> Result<(CostReport, Vec<f64>)> {
    value_and_grad_with(kind, task, seq, theta, batch, &mut Estimator::Exact)
}

/// Exact parameter-shift gradient.
pub fn grad(kind: CostKind, task: &CloneTask, seq: &GateSequence, theta: &[f64], batch: &Batch) -> Result<Vec<f64>> {
    value_and_grad(kind, task, seq, theta, batch).map(|(_, g)| g)
}

/// Central finite differences of the exact cost; unparameterized positions are 0.
pub fn finite_diff_grad(
    kind: CostKind,
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h={h} must be positive")));
    }
    let mut out = vec![0.0; seq.len()];
    let mut t = theta.to_vec();
    for p in seq.parameterized_positions() {
        t[p] = theta[p] + h;
        let up = evaluate(kind, task, seq, &t, batch)?.value;
        t[p] = theta[p] - h;
        let down = evaluate(kind, task, seq, &t, batch)?.value;
        t[p] = theta[p];
        out[p] = (up - down) / (2.0 * h);
    }
    Ok(out)
}

/// Local cost on a list of samples.
pub fn local_cost(task: &CloneTask, seq: &GateSequence, theta: &[f64], batch: &[StateSample]) -> Result<CostReport> {
    evaluate(CostKind::Local, task, seq, theta, &Batch::new(batch)?)
}

/// Squared local cost on a list of samples.
pub fn squared_cost(task: &CloneTask, seq: &GateSequence, theta: &[f64], batch: &[StateSample]) -> Result<CostReport> {
    evaluate(CostKind::Squared, task, seq, theta, &Batch::new(batch)?)
}

/// Global cost on a list of samples.
pub fn global_cost(task: &CloneTask, seq: &GateSequence, theta: &[f64], batch: &[StateSample]) -> Result<CostReport> {
    evaluate(CostKind::Global, task, seq, theta, &Batch::new(batch)?)
}

/// Asymmetric 1 -> 2 cost with Bob's parameter `p`.
pub fn asymmetric_cost(
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &[StateSample],
    p: f64,
) -> Result<CostReport> {
    evaluate(CostKind::Asymmetric { p }, task, seq, theta, &Batch::new(batch)?)
}

/// Distance guarantees implied by a cost within ε of its optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessBounds {
    /// Bound on the Fubini-Study distance to the optimal clone (or, for the
    /// global cost, to the optimal joint state).
    pub fubini_study: f64,
    /// Bound on the trace distance, where one is known for the cost.
    pub trace: Option<f64>,
}

/// Faithfulness bounds for cost `kind`, excess cost `epsilon`, optimal
/// fidelity `f_opt` (global fidelity for the global cost) and family
/// normalization `normalization`.
///
/// * squared: D_FS ≤ Nε / (2(1 − F) sin F), D_Tr ≤ ½√(4F(1−F) + εN(1−2F)/(2(1−F)))
/// * local:   D_FS ≤ Nε / sin F,             D_Tr ≤ ½√(4F(1−F) + Nε(1−2F))
/// * global:  as local, with the optimal global fidelity
/// * asymmetric: D_FS ≤ √(Nε) / sin F
pub fn faithfulness_bounds(epsilon: f64, f_opt: f64, normalization: f64, kind: CostKind) -> Result<FaithfulnessBounds> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon={epsilon} must be non-negative")));
    }
    if !(f_opt > 0.0 && f_opt < 1.0) {
        return Err(Error::InvalidArgument(format!("optimal fidelity {f_opt} outside (0,1)")));
    }
    if !(normalization > 0.0) {
        return Err(Error::InvalidArgument(format!("normalization {normalization} must be positive")));
    }
    let (f, n) = (f_opt, normalization);
    let gap = 4.0 * f * (1.0 - f);
    let trace = |extra: f64| 0.5 * (gap + extra).max(0.0).sqrt();
    Ok(match kind {
        CostKind::Squared => FaithfulnessBounds {
            fubini_study: n * epsilon / (2.0 * (1.0 - f) * f.sin()),
            trace: Some(trace(epsilon * n * (1.0 - 2.0 * f) / (2.0 * (1.0 - f)))),
        },
        CostKind::Local | CostKind::Global => FaithfulnessBounds {
            fubini_study: n * epsilon / f.sin(),
            trace: Some(trace(n * epsilon * (1.0 - 2.0 * f))),
        },
        CostKind::Asymmetric { .. } => FaithfulnessBounds { fubini_study: (n * epsilon).sqrt() / f.sin(), trace: None },
    })
}

/// Outcome of checking C_L ≤ C_G ≤ N·C_L.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub c_l: f64,
    pub c_g: f64,
    pub holds: bool,
}

/// Evaluates the local and global costs on a shared batch and checks
/// C_L ≤ C_G ≤ N·C_L (to 1e-12).
pub fn cost_sandwich_check(
    task: &CloneTask,
    seq: &GateSequence,
    theta: &[f64],
    batch: &Batch,
) -> Result<SandwichCheck> {
    let c_l = evaluate(CostKind::Local, task, seq, theta, batch)?.value;
    let c_g = evaluate(CostKind::Global, task, seq, theta, batch)?.value;
    let tol = 1e-12;
    let holds = c_l <= c_g + tol && c_g <= task.n_out as f64 * c_l + tol;
    Ok(SandwichCheck { c_l, c_g, holds })
}

/// Two-qubit block used by [`alternating_layered_ansatz`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// RY⊗RY · CZ · RY⊗RY: the hardware-efficient block (real, far from a
    /// local 2-design).
    #[default]
    Ry,
    /// Four layers of RY·RZ on both qubits interleaved with three CZ gates:
    /// an approximation to a two-qubit 2-design.
    Euler,
}

impl BlockKind {
    /// Appends one block on (i, i+1); returns the positions of its interior
    /// rotations (those with a CZ of the same block on both sides).
    fn push(self, specs: &mut Vec<GateSpec>, i: usize) -> Vec<usize> {
        match self {
            BlockKind::Ry => {
                specs.extend([
                    GateSpec::ry(i),
                    GateSpec::ry(i + 1),
                    GateSpec::cz(i, i + 1),
                    GateSpec::ry(i),
                    GateSpec::ry(i + 1),
                ]);
                Vec::new()
            }
            BlockKind::Euler => {
                let mut interior = Vec::new();
                for layer in 0..4 {
                    if layer > 0 {
                        specs.push(GateSpec::cz(i, i + 1));
                    }
                    if layer == 1 || layer == 2 {
                        interior.extend(specs.len()..specs.len() + 4);
                    }
                    specs.extend([GateSpec::ry(i), GateSpec::rz(i), GateSpec::ry(i + 1), GateSpec::rz(i + 1)]);
                }
                interior
            }
        }
    }
}

fn layered_specs(n: usize, layers: usize, block: BlockKind) -> Result<(Vec<GateSpec>, Vec<usize>)> {
    if n < 2 || layers == 0 {
        return Err(Error::InvalidArgument(format!("need n >= 2 and at least one layer, got n={n} K={layers}")));
    }
    let mut specs = Vec::new();
    let mut interior = Vec::new();
    for k in 0..layers {
        let mut i = k % 2;
        while i + 1 < n {
            interior.extend(block.push(&mut specs, i));
            i += 2;
        }
    }
    Ok((specs, interior))
}

/// Alternating layered ansatz on `n` qubits with `layers` layers. Layer k
/// places two-qubit blocks on pairs (i, i+1) with i ≡ k (mod 2).
pub fn alternating_layered_ansatz(n: usize, layers: usize, block: BlockKind) -> Result<GateSequence> {
    GateSequence::from_specs(&layered_specs(n, layers, block)?.0)
}

/// Simplified lower bound 2^k / (3^{K+k+2} · 2N²) on the local-cost gradient
/// variance for an alternating layered ansatz of depth K.
pub fn barren_plateau_bound(n: usize, layers: usize, k: usize) -> f64 {
    2f64.powi(k as i32) / (3f64.powi((layers + k + 2) as i32) * 2.0 * (n * n) as f64)
}

/// Empirical gradient variance of the local cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub n_qubits: usize,
    pub layers: usize,
    pub n_samples: usize,
    /// Var[∂C_L/∂θ_l] for every position (0 for unparameterized ones).
    pub per_position: Vec<f64>,
    /// Smallest variance over parameterized positions.
    pub min_variance: f64,
    /// Mean variance over parameterized positions.
    pub mean_variance: f64,
    /// Rotations strictly inside a block (CZ of the same block on both
    /// sides), where the block halves around the parameter randomize; empty
    /// for [`BlockKind::Ry`].
    pub interior_positions: Vec<usize>,
    /// Smallest variance over `interior_positions` (`None` if there are none).
    pub min_interior_variance: Option<f64>,
    pub lower_bound: f64,
}

/// Draws `n_samples` uniformly random angle vectors for the alternating
/// layered ansatz on a 1 -> n phase-covariant cloning task without ancilla
/// (fixed batch of `batch_size` input states) and measures the variance of
/// every local-cost partial derivative. The bound uses k = 0, its strictest
/// instance. It presumes a cost on a fixed input state; averaging over many
/// phase-covariant inputs cancels the equatorial Bloch components and shrinks
/// the gradients, so `batch_size = 1` is the setting the bound speaks to.
pub fn gradient_variance_experiment(
    n_qubits: usize,
    layers: usize,
    block: BlockKind,
    n_samples: usize,
    batch_size: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if n_samples < 2 || batch_size == 0 {
        return Err(Error::InvalidArgument("need at least 2 angle samples and a non-empty batch".into()));
    }
    let task = CloneTask::standard(1, n_qubits, 0, StateFamily::PhaseCovariant)?;
    let (specs, interior_positions) = layered_specs(n_qubits, layers, block)?;
    let seq = GateSequence::from_specs(&specs)?;
    let batch = Batch::new(&task.family.sample(batch_size, &mut substream(seed, "sampling")))?;
    let mut rng = substream(seed, "angles");
    let mut sum = vec![0.0; seq.len()];
    let mut sum_sq = vec![0.0; seq.len()];
    for _ in 0..n_samples {
        let mut theta: Vec<f64> = (0..seq.len()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        seq.sanitize(&mut theta);
        let g = grad(CostKind::Local, &task, &seq, &theta, &batch)?;
        for (i, x) in g.iter().enumerate() {
            sum[i] += x;
            sum_sq[i] += x * x;
        }
    }
    let m = n_samples as f64;
    let per_position: Vec<f64> =
        sum.iter().zip(&sum_sq).map(|(s, s2)| ((s2 - s * s / m) / (m - 1.0)).max(0.0)).collect();
    let params = seq.parameterized_positions();
    let min_variance = params.iter().map(|&p| per_position[p]).fold(f64::INFINITY, f64::min);
    let mean_variance = params.iter().map(|&p| per_position[p]).sum::<f64>() / params.len() as f64;
    let min_interior_variance = interior_positions.iter().map(|&p| per_position[p]).reduce(f64::min);
    Ok(VarianceReport {
        n_qubits,
        layers,
        n_samples,
        per_position,
        min_variance,
        mean_variance,
        interior_positions,
        min_interior_variance,
        lower_bound: barren_plateau_bound(n_qubits, layers, 0),
    })
}
