//! Parameterized gate sequences drawn from a gate pool, their unitaries, and
//! the evolution of cloning inputs into output states.
//!
//! Rotations follow R_P(θ) = exp(−iθP/2) and CZ = diag(1, 1, 1, −1). In a
//! sequence the first listed gate acts first on the state.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::StateFamily;
use crate::qmath::{c, partial_trace, re, ComplexMatrix, DensityMatrix, PureState, C64};

/// Gate kinds available to the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    CZ,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::CZ)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CZ => "CZ",
        };
        f.write_str(s)
    }
}

/// One gate of a pool: a kind plus the qubits it acts on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateSpec {
    pub fn rx(q: usize) -> Self {
        Self { kind: GateKind::RX, qubits: vec![q] }
    }

    pub fn ry(q: usize) -> Self {
        Self { kind: GateKind::RY, qubits: vec![q] }
    }

    pub fn rz(q: usize) -> Self {
        Self { kind: GateKind::RZ, qubits: vec![q] }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self { kind: GateKind::CZ, qubits: vec![a, b] }
    }

    /// Rotations carry a trainable angle; CZ does not.
    pub fn parameterized(&self) -> bool {
        self.kind.is_rotation()
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.qubits.as_slice()) {
            (GateKind::CZ, [a, b]) if a != b => Ok(()),
            (GateKind::CZ, _) => {
                Err(Error::InvalidArgument(format!("CZ needs two distinct qubits, got {:?}", self.qubits)))
            }
            (_, [_]) => Ok(()),
            (k, q) => Err(Error::InvalidArgument(format!("{k} needs one qubit, got {q:?}"))),
        }
    }

    /// True when the gate shares at least one qubit with `other`.
    pub fn overlaps(&self, other: &GateSpec) -> bool {
        self.qubits.iter().any(|q| other.qubits.contains(q))
    }

    /// Same CZ pair regardless of qubit order.
    pub fn same_cz_pair(&self, other: &GateSpec) -> bool {
        self.kind == GateKind::CZ
            && other.kind == GateKind::CZ
            && ((self.qubits[0] == other.qubits[0] && self.qubits[1] == other.qubits[1])
                || (self.qubits[0] == other.qubits[1] && self.qubits[1] == other.qubits[0]))
    }

    fn max_qubit(&self) -> usize {
        self.qubits.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.qubits.as_slice() {
            [q] => write!(f, "{}{}", self.kind, q),
            [a, b] => write!(f, "{}{}{}", self.kind, a, b),
            _ => write!(f, "{}?", self.kind),
        }
    }
}

/// Ordered list of gates from which sequences are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatePool {
    pub name: String,
    pub gates: Vec<GateSpec>,
}

impl GatePool {
    pub fn new(name: impl Into<String>, gates: Vec<GateSpec>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::InvalidArgument("gate pool is empty".into()));
        }
        for g in &gates {
            g.validate()?;
        }
        Ok(Self { name: name.into(), gates })
    }

    /// RZ, RX, RY on every qubit in `0..num_qubits` followed by CZ on `pairs`.
    pub fn rotations_with_cz(name: impl Into<String>, num_qubits: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut gates = Vec::new();
        for kind in [GateKind::RZ, GateKind::RX, GateKind::RY] {
            for q in 0..num_qubits {
                gates.push(GateSpec { kind, qubits: vec![q] });
            }
        }
        for &(a, b) in pairs {
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::QubitOutOfRange { index: a.max(b), num_qubits });
            }
            gates.push(GateSpec::cz(a, b));
        }
        Self::new(name, gates)
    }

    /// Three-qubit fully connected pool used for phase-covariant cloning.
    pub fn phase_covariant() -> Self {
        Self::rotations_with_cz("G_PC", 3, &[(0, 1), (1, 2), (0, 2)]).expect("valid pool")
    }

    /// Three-qubit nearest-neighbour pool used for the two-state protocol.
    pub fn p1() -> Self {
        Self::rotations_with_cz("G_P1", 3, &[(0, 1), (1, 2)]).expect("valid pool")
    }

    /// Rotations on every qubit with CZ along the chain 0-1-2-...
    pub fn nearest_neighbour(num_qubits: usize) -> Self {
        let pairs: Vec<_> = (1..num_qubits).map(|q| (q - 1, q)).collect();
        Self::rotations_with_cz(format!("NN{num_qubits}"), num_qubits, &pairs).expect("valid pool")
    }

    /// Rotations on every qubit with CZ between every pair.
    pub fn fully_connected(num_qubits: usize) -> Self {
        let mut pairs = Vec::new();
        for a in 0..num_qubits {
            for b in a + 1..num_qubits {
                pairs.push((a, b));
            }
        }
        Self::rotations_with_cz(format!("FC{num_qubits}"), num_qubits, &pairs).expect("valid pool")
    }

    /// Looks up a pool by its identifier (`G_PC`, `G_P1`, `NN<n>`, `FC<n>`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "G_PC" => Ok(Self::phase_covariant()),
            "G_P1" => Ok(Self::p1()),
            _ => {
                let parse = |prefix: &str| name.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok());
                if let Some(n) = parse("NN").filter(|&n| (1..=6).contains(&n)) {
                    Ok(Self::nearest_neighbour(n))
                } else if let Some(n) = parse("FC").filter(|&n| (1..=6).contains(&n)) {
                    Ok(Self::fully_connected(n))
                } else {
                    Err(Error::InvalidArgument(format!("unknown gate pool '{name}'")))
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Smallest register size that holds every gate.
    pub fn num_qubits(&self) -> usize {
        self.gates.iter().map(GateSpec::max_qubit).max().unwrap_or(0) + 1
    }

    pub fn index_of(&self, spec: &GateSpec) -> Option<usize> {
        self.gates.iter().position(|g| g == spec || g.same_cz_pair(spec))
    }

    /// Indices of parameterized gates.
    pub fn rotation_indices(&self) -> Vec<usize> {
        (0..self.gates.len()).filter(|&i| self.gates[i].parameterized()).collect()
    }
}

/// A sequence of pool indices g = [g1, ..., gl].
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    pool: Arc<GatePool>,
    g: Vec<usize>,
}

impl GateSequence {
    pub fn new(pool: Arc<GatePool>, g: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = g.iter().find(|&&i| i >= pool.len()) {
            return Err(Error::InvalidArgument(format!("gate index {bad} outside pool of size {}", pool.len())));
        }
        Ok(Self { pool, g })
    }

    /// Builds a sequence (and a pool holding exactly its distinct gates) from specs.
    pub fn from_specs(specs: &[GateSpec]) -> Result<Self> {
        let mut distinct: Vec<GateSpec> = Vec::new();
        let mut g = Vec::with_capacity(specs.len());
        for s in specs {
            s.validate()?;
            let idx = match distinct.iter().position(|d| d == s) {
                Some(i) => i,
                None => {
                    distinct.push(s.clone());
                    distinct.len() - 1
                }
            };
            g.push(idx);
        }
        if distinct.is_empty() {
            distinct.push(GateSpec::rz(0));
        }
        let pool = Arc::new(GatePool { name: "custom".into(), gates: distinct });
        Ok(Self { pool, g })
    }

    pub fn pool(&self) -> &Arc<GatePool> {
        &self.pool
    }

    pub fn indices(&self) -> &[usize] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn spec(&self, position: usize) -> &GateSpec {
        &self.pool.gates[self.g[position]]
    }

    pub fn specs(&self) -> impl Iterator<Item = &GateSpec> + '_ {
        self.g.iter().map(move |&i| &self.pool.gates[i])
    }

    /// Positions holding parameterized gates.
    pub fn parameterized_positions(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&p| self.spec(p).parameterized()).collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.specs().map(GateSpec::max_qubit).max().map_or(1, |m| m + 1)
    }

    /// Zeroes angles at unparameterized positions.
    pub fn sanitize(&self, theta: &mut [f64]) {
        for (p, t) in theta.iter_mut().enumerate() {
            if !self.spec(p).parameterized() {
                *t = 0.0;
            }
        }
    }

    pub(crate) fn check(&self, theta: &[f64], total_qubits: usize) -> Result<()> {
        if theta.len() != self.g.len() {
            return Err(Error::LengthMismatch { expected: self.g.len(), got: theta.len() });
        }
        for s in self.specs() {
            if s.max_qubit() >= total_qubits {
                return Err(Error::QubitOutOfRange { index: s.max_qubit(), num_qubits: total_qubits });
            }
        }
        Ok(())
    }
}

/// 2x2 matrix of a rotation gate, row-major.
pub fn rotation_matrix(kind: GateKind, angle: f64) -> [C64; 4] {
    let (s, co) = (0.5 * angle).sin_cos();
    match kind {
        GateKind::RX => [re(co), c(0.0, -s), c(0.0, -s), re(co)],
        GateKind::RY => [re(co), re(-s), re(s), re(co)],
        GateKind::RZ => [c(co, -s), re(0.0), re(0.0), c(co, s)],
        GateKind::CZ => panic!("CZ is not a single-qubit rotation"),
    }
}

/// Applies one gate to a state vector of `num_qubits` qubits in place.
pub fn apply_gate(state: &mut [C64], spec: &GateSpec, angle: f64, num_qubits: usize) {
    match spec.kind {
        GateKind::CZ => {
            let ma = 1usize << (num_qubits - 1 - spec.qubits[0]);
            let mb = 1usize << (num_qubits - 1 - spec.qubits[1]);
            let both = ma | mb;
            for (i, z) in state.iter_mut().enumerate() {
                if i & both == both {
                    *z = -*z;
                }
            }
        }
        kind => {
            let u = rotation_matrix(kind, angle);
            let m = 1usize << (num_qubits - 1 - spec.qubits[0]);
            for i in 0..state.len() {
                if i & m == 0 {
                    let a = state[i];
                    let b = state[i | m];
                    state[i] = u[0] * a + u[1] * b;
                    state[i | m] = u[2] * a + u[3] * b;
                }
            }
        }
    }
}

/// Full 2^n unitary of one gate.
pub fn gate_unitary(spec: &GateSpec, angle: f64, total_qubits: usize) -> Result<ComplexMatrix> {
    spec.validate()?;
    if spec.max_qubit() >= total_qubits {
        return Err(Error::QubitOutOfRange { index: spec.max_qubit(), num_qubits: total_qubits });
    }
    let dim = 1usize << total_qubits;
    let mut u = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let mut v = PureState::basis(total_qubits, col).into_amplitudes();
        apply_gate(&mut v, spec, angle, total_qubits);
        for (row, z) in v.into_iter().enumerate() {
            u.set(row, col, z);
        }
    }
    Ok(u)
}

/// Unitary U = U_l ... U_2 U_1 of a sequence (first listed gate acts first).
pub fn build_unitary(seq: &GateSequence, theta: &[f64], total_qubits: usize) -> Result<ComplexMatrix> {
    seq.check(theta, total_qubits)?;
    let dim = 1usize << total_qubits;
    let mut u = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let v = simulate(seq, theta, PureState::basis(total_qubits, col).amplitudes(), total_qubits);
        for (row, z) in v.into_iter().enumerate() {
            u.set(row, col, z);
        }
    }
    Ok(u)
}

/// Evolves a state vector through the sequence. Lengths are not checked.
pub fn simulate(seq: &GateSequence, theta: &[f64], input: &[C64], total_qubits: usize) -> Vec<C64> {
    let mut state = input.to_vec();
    for (spec, &t) in seq.specs().zip(theta) {
        apply_gate(&mut state, spec, t, total_qubits);
    }
    state
}

/// One cloning problem: M input copies, N output clones, optional ancillas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloneTask {
    pub m_in: usize,
    pub n_out: usize,
    pub num_ancilla: usize,
    pub clone_registers: Vec<usize>,
    pub family: StateFamily,
}

impl CloneTask {
    pub fn new(
        m_in: usize,
        n_out: usize,
        num_ancilla: usize,
        clone_registers: Vec<usize>,
        family: StateFamily,
    ) -> Result<Self> {
        let task = Self { m_in, n_out, num_ancilla, clone_registers, family };
        task.validate()?;
        Ok(task)
    }

    /// M -> N task with clones on qubits 0..N and ancillas after them.
    pub fn standard(m_in: usize, n_out: usize, num_ancilla: usize, family: StateFamily) -> Result<Self> {
        Self::new(m_in, n_out, num_ancilla, (0..n_out).collect(), family)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.m_in && self.m_in <= self.n_out) {
            return Err(Error::InvalidArgument(format!("need 1 <= M <= N, got M={} N={}", self.m_in, self.n_out)));
        }
        if self.clone_registers.len() != self.n_out {
            return Err(Error::InvalidArgument(format!(
                "{} clone registers listed for N={}",
                self.clone_registers.len(),
                self.n_out
            )));
        }
        let total = self.total_qubits();
        if total > 8 {
            return Err(Error::InvalidArgument(format!("{total} qubits exceeds the dense simulator limit of 8")));
        }
        for (i, &q) in self.clone_registers.iter().enumerate() {
            if q >= total {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: total });
            }
            if self.clone_registers[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!("clone register {q} listed twice")));
            }
        }
        self.family.validate()
    }

    pub fn total_qubits(&self) -> usize {
        self.n_out + self.num_ancilla
    }

    /// |psi>^{⊗M} ⊗ |0>^{⊗(N−M)} ⊗ |0>^{⊗ancilla}.
    pub fn prepare_input(&self, psi: &PureState) -> Result<PureState> {
        if psi.num_qubits() != 1 {
            return Err(Error::DimensionMismatch(psi.dim(), 2));
        }
        Ok(psi.power(self.m_in).tensor(&PureState::zero(self.total_qubits() - self.m_in)))
    }
}

/// Output state U|in><in|U† of the full register.
pub fn run_clone_task(task: &CloneTask, seq: &GateSequence, theta: &[f64], input: &PureState) -> Result<DensityMatrix> {
    let n = task.total_qubits();
    if input.num_qubits() != n {
        return Err(Error::DimensionMismatch(input.dim(), 1 << n));
    }
    seq.check(theta, n)?;
    let out = PureState::normalized(simulate(seq, theta, input.amplitudes(), n))?;
    Ok(out.to_density())
}

/// Single-qubit reduced states of the clone registers, in register order.
pub fn clone_states(rho_out: &DensityMatrix, task: &CloneTask) -> Result<Vec<DensityMatrix>> {
    if rho_out.num_qubits() != task.total_qubits() {
        return Err(Error::DimensionMismatch(rho_out.num_qubits(), task.total_qubits()));
    }
    task.clone_registers.iter().map(|&q| partial_trace(rho_out, &[q])).collect()
}

/// Joint state of the clone registers with ancillas traced out.
pub fn clones_joint_state(rho_out: &DensityMatrix, task: &CloneTask) -> Result<DensityMatrix> {
    partial_trace(rho_out, &task.clone_registers)
}

/// Fixed three-qubit cloning network: a two-angle-triple preparation of
/// qubits 1 and 2 followed by four CNOTs between the input qubit 0 and them.
/// CNOT(c→t) is compiled as RY_t(−π/2) · CZ(c,t) · RY_t(π/2).
///
/// Returns the sequence over [`GatePool::phase_covariant`], the template
/// angles (CNOT rotations set, preparation angles 0) and the positions of the
/// preparation angles, which are the only ones meant to be trained.
pub fn ideal_cloning_ansatz() -> (GateSequence, Vec<f64>, Vec<usize>) {
    use std::f64::consts::FRAC_PI_2;
    let mut specs: Vec<GateSpec> = Vec::new();
    let mut theta = Vec::new();
    let mut trainable = Vec::new();
    let mut prep = |specs: &mut Vec<GateSpec>, theta: &mut Vec<f64>, q: usize| {
        trainable.push(specs.len());
        specs.push(GateSpec::ry(q));
        theta.push(0.0);
    };
    let cnot = |specs: &mut Vec<GateSpec>, theta: &mut Vec<f64>, c: usize, t: usize| {
        specs.extend([GateSpec::ry(t), GateSpec::cz(c, t), GateSpec::ry(t)]);
        theta.extend([-FRAC_PI_2, 0.0, FRAC_PI_2]);
    };
    prep(&mut specs, &mut theta, 1);
    cnot(&mut specs, &mut theta, 1, 2);
    prep(&mut specs, &mut theta, 2);
    cnot(&mut specs, &mut theta, 2, 1);
    prep(&mut specs, &mut theta, 1);
    cnot(&mut specs, &mut theta, 0, 1);
    cnot(&mut specs, &mut theta, 0, 2);
    cnot(&mut specs, &mut theta, 1, 0);
    cnot(&mut specs, &mut theta, 2, 0);
    let pool = Arc::new(GatePool::phase_covariant());
    let g = specs.iter().map(|s| pool.index_of(s).expect("gate in pool")).collect();
    let seq = GateSequence::new(pool, g).expect("valid indices");
    (seq, theta, trainable)
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    kind: GateKind,
    qubits: Vec<usize>,
    theta: f64,
}

/// Serializes a circuit as a JSON array of `{kind, qubits, theta}` records.
pub fn serialize_circuit(seq: &GateSequence, theta: &[f64]) -> Result<String> {
    if theta.len() != seq.len() {
        return Err(Error::LengthMismatch { expected: seq.len(), got: theta.len() });
    }
    let records: Vec<GateRecord> =
        seq.specs().zip(theta).map(|(s, &t)| GateRecord { kind: s.kind, qubits: s.qubits.clone(), theta: t }).collect();
    serde_json::to_string_pretty(&records).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_records(text: &str) -> Result<Vec<GateRecord>> {
    let records: Vec<GateRecord> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for r in &records {
        if !r.theta.is_finite() {
            return Err(Error::Parse("non-finite angle".into()));
        }
        GateSpec { kind: r.kind, qubits: r.qubits.clone() }.validate().map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(records)
}

/// Parses a circuit file; the returned sequence uses a pool of its distinct gates.
pub fn parse_circuit(text: &str) -> Result<(GateSequence, Vec<f64>)> {
    let records = parse_records(text)?;
    let specs: Vec<GateSpec> = records.iter().map(|r| GateSpec { kind: r.kind, qubits: r.qubits.clone() }).collect();
    let seq = GateSequence::from_specs(&specs)?;
    let mut theta: Vec<f64> = records.iter().map(|r| r.theta).collect();
    seq.sanitize(&mut theta);
    Ok((seq, theta))
}

/// Parses a circuit file against a given pool; every gate must belong to it.
pub fn parse_circuit_with_pool(text: &str, pool: Arc<GatePool>) -> Result<(GateSequence, Vec<f64>)> {
    let records = parse_records(text)?;
    let mut g = Vec::with_capacity(records.len());
    for r in &records {
        let spec = GateSpec { kind: r.kind, qubits: r.qubits.clone() };
        g.push(pool.index_of(&spec).ok_or_else(|| Error::Parse(format!("gate {spec} is not in pool {}", pool.name)))?);
    }
    let seq = GateSequence::new(pool, g)?;
    let mut theta: Vec<f64> = records.iter().map(|r| r.theta).collect();
    seq.sanitize(&mut theta);
    Ok((seq, theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_have_expected_sizes() {
        assert_eq!(GatePool::phase_covariant().len(), 12);
        assert_eq!(GatePool::p1().len(), 11);
        assert_eq!(GatePool::fully_connected(5).len(), 15 + 10);
        assert_eq!(GatePool::nearest_neighbour(4).len(), 12 + 3);
        assert_eq!(GatePool::by_name("FC4").unwrap(), GatePool::fully_connected(4));
        assert!(GatePool::by_name("XX").is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(GateSpec::cz(1, 1).validate().is_err());
        assert!(GateSpec { kind: GateKind::RX, qubits: vec![0, 1] }.validate().is_err());
        assert!(GatePool::new("empty", vec![]).is_err());
    }

    #[test]
    fn sequence_rejects_out_of_pool_index() {
        let pool = Arc::new(GatePool::p1());
        assert!(GateSequence::new(pool, vec![11]).is_err());
    }

    #[test]
    fn build_unitary_checks_lengths_and_range() {
        let seq = GateSequence::from_specs(&[GateSpec::rx(2)]).unwrap();
        assert!(matches!(build_unitary(&seq, &[0.1, 0.2], 3), Err(Error::LengthMismatch { .. })));
        assert!(matches!(build_unitary(&seq, &[0.1], 2), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn clone_task_validation() {
        let fam = StateFamily::PhaseCovariant;
        assert!(CloneTask::new(2, 1, 0, vec![0], fam.clone()).is_err());
        assert!(CloneTask::new(1, 2, 1, vec![0, 0], fam.clone()).is_err());
        assert!(CloneTask::new(1, 2, 0, vec![0, 2], fam.clone()).is_err());
        assert_eq!(CloneTask::standard(1, 2, 1, fam).unwrap().total_qubits(), 3);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(parse_circuit("not json").is_err());
        assert!(parse_circuit(r#"[{"kind":"RQ","qubits":[0],"theta":0.0}]"#).is_err());
        assert!(parse_circuit(r#"[{"kind":"CZ","qubits":[0,0],"theta":0.0}]"#).is_err());
        let pool = Arc::new(GatePool::p1());
        assert!(parse_circuit_with_pool(r#"[{"kind":"CZ","qubits":[0,2],"theta":0.0}]"#, pool).is_err());
    }
}
