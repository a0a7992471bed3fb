//! Cloning attacks on two quantum coin-flipping protocols: the two-state
//! protocol (states cos φ|0> ± sin φ|1>) and the four-state protocol
//! (states |φ_{x,a}>, Alice's bit a).

use serde::{Deserialize, Serialize};

use crate::circuit::{clone_states, clones_joint_state, run_clone_task, CloneTask, GateSequence};
use crate::error::{Error, Result};
use crate::families::{coinflip4_ideal_clone, coinflip4_state, sdqcm_outputs, StateFamily};
use crate::qmath::{fidelity, partial_trace, DensityMatrix, PureState, C64};

/// Optimal probability of identifying which of two states was prepared,
/// ½(1 + ‖p ρ₁ − (1 − p) ρ₂‖₁) for prior `prior` on ρ₁.
pub fn helstrom(rho1: &DensityMatrix, rho2: &DensityMatrix, prior: f64) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    if !(0.0..=1.0).contains(&prior) {
        return Err(Error::InvalidArgument(format!("prior {prior} outside [0,1]")));
    }
    let diff = &rho1.matrix().scale(C64::new(prior, 0.0)) - &rho2.matrix().scale(C64::new(1.0 - prior, 0.0));
    let norm: f64 = diff.hermitian_part().hermitian_eigenvalues().iter().map(|x| x.abs()).sum();
    Ok((0.5 * (1.0 + norm)).clamp(0.0, 1.0))
}

/// Source of cloner outputs for an attack.
#[derive(Clone, Debug)]
pub enum ClonerHandle {
    /// Reference cloners from closed forms: the optimal symmetric
    /// state-dependent cloner for a pair of states, and the Bloch-shrinking
    /// four-state cloner for attack model II.
    Analytic,
    /// A trained circuit.
    Learned { task: CloneTask, seq: GateSequence, theta: Vec<f64> },
}

/// Clone outputs for one input state.
#[derive(Clone, Debug)]
pub struct ClonerOutput {
    /// Single-qubit clones in register order.
    pub clones: Vec<DensityMatrix>,
    /// Joint state of the clone registers (ancillas traced out).
    pub joint: DensityMatrix,
}

impl ClonerHandle {
    /// Output of a learned cloner on `psi`.
    pub fn learned_output(&self, psi: &PureState) -> Result<ClonerOutput> {
        match self {
            ClonerHandle::Learned { task, seq, theta } => {
                let rho = run_clone_task(task, seq, theta, &task.prepare_input(psi)?)?;
                Ok(ClonerOutput { clones: clone_states(&rho, task)?, joint: clones_joint_state(&rho, task)? })
            }
            ClonerHandle::Analytic => Err(Error::InvalidArgument("analytic cloner has no circuit".into())),
        }
    }

    fn check_family(&self, want: &str, ok: impl Fn(&StateFamily) -> bool) -> Result<()> {
        if let ClonerHandle::Learned { task, .. } = self {
            if !ok(&task.family) || task.n_out != 2 || task.m_in != 1 {
                return Err(Error::InvalidArgument(format!("attack needs a 1 -> 2 cloner for the {want} family")));
            }
        }
        Ok(())
    }
}

/// Outcome of one attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub protocol: String,
    pub attack: String,
    /// Single-round probability of guessing Alice's bit.
    pub p_disc: f64,
    /// Probability that Alice detects the cheating (per returned copy).
    pub p_detect: f64,
    /// Detection probability over all `n_rounds` returned copies, 1 − F^n.
    pub p_detect_aggregate: f64,
    /// Probability that Bob's announced bit forces his outcome and he is not caught.
    pub p_succ_overall: f64,
    /// p_succ_overall − ½.
    pub bias: f64,
    pub n_rounds: usize,
    /// Local fidelity of the clone returned to Alice (where relevant).
    pub returned_fidelity: Option<f64>,
}

impl AttackReport {
    fn new(
        protocol: &str,
        attack: &str,
        p_disc: f64,
        p_detect: f64,
        p_detect_aggregate: f64,
        overall: f64,
        n: usize,
    ) -> Self {
        let overall = overall.clamp(0.0, 1.0);
        Self {
            protocol: protocol.into(),
            attack: attack.into(),
            p_disc,
            p_detect,
            p_detect_aggregate,
            p_succ_overall: overall,
            bias: overall - 0.5,
            n_rounds: n,
            returned_fidelity: None,
        }
    }
}

/// Probability that a majority of `n` independent guesses, each wrong with
/// probability `p_fail`, is right; a tie (even n) is broken by a fair coin.
pub fn majority_vote_success(p_fail: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    if !(0.0..=1.0).contains(&p_fail) {
        return Err(Error::InvalidArgument(format!("failure probability {p_fail} outside [0,1]")));
    }
    let q = 1.0 - p_fail;
    let mut binom = 1.0f64; // C(n, k), built incrementally
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        let term = binom * q.powi(k as i32) * p_fail.powi((n - k) as i32);
        if 2 * k > n {
            total += term;
        } else if 2 * k == n {
            total += 0.5 * term;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

fn p1_states(family: &StateFamily) -> Result<(PureState, PureState)> {
    match family.states() {
        Some(s) if matches!(family, StateFamily::CoinFlip2 { .. }) => Ok((s[0].state.clone(), s[1].state.clone())),
        _ => Err(Error::InvalidArgument("two-state attack needs the CoinFlip2 family".into())),
    }
}

/// Cloning attack on the two-state protocol with `n` rounds.
///
/// Bob clones the qubit he must return, sends one clone back and keeps the
/// other. For Alice's announcement 0 he discriminates |φ₀><φ₀| ⊗ |φ₁><φ₁| from
/// |φ₁><φ₁| ⊗ ρ_c⁰ (ρ_c⁰ the kept clone of φ₀), for announcement 1 the mirror
/// pair; p_disc averages the two Helstrom probabilities. Alice detects him with
/// probability 1 − F of the returned clone. For a learned cloner Bob picks the
/// register assignment (returned, kept) with the larger overall success. With
/// n rounds the guess is a majority vote and the detection compounds.
pub fn attack_p1(cloner: &ClonerHandle, family: &StateFamily, n: usize) -> Result<AttackReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    cloner.check_family("two-state", |f| matches!(f, StateFamily::CoinFlip2 { .. }) && f == family)?;
    let (phi0, phi1) = p1_states(family)?;
    let (out0, out1) = match cloner {
        ClonerHandle::Analytic => {
            let (g0, g1) = sdqcm_outputs(&phi0, &phi1)?;
            let split = |g: &PureState| -> Result<Vec<DensityMatrix>> {
                let rho = g.to_density();
                Ok(vec![partial_trace(&rho, &[0])?, partial_trace(&rho, &[1])?])
            };
            (split(&g0)?, split(&g1)?)
        }
        ClonerHandle::Learned { .. } => (cloner.learned_output(&phi0)?.clones, cloner.learned_output(&phi1)?.clones),
    };
    let (d0, d1) = (phi0.to_density(), phi1.to_density());
    let mut best: Option<AttackReport> = None;
    for (ret, kept) in [(0usize, 1usize), (1, 0)] {
        let p_a = helstrom(&d0.tensor(&d1), &d1.tensor(&out0[kept]), 0.5)?;
        let p_b = helstrom(&d1.tensor(&d0), &d0.tensor(&out1[kept]), 0.5)?;
        let p_disc = 0.5 * (p_a + p_b);
        let f_ret = 0.5 * (out0[ret].overlap(&phi0) + out1[ret].overlap(&phi1));
        let p_detect = (1.0 - f_ret).max(0.0);
        let p_detect_n = 1.0 - f_ret.min(1.0).powi(n as i32);
        let guess = majority_vote_success(1.0 - p_disc, n)?;
        let mut r = AttackReport::new("P1", "cloning", p_disc, p_detect, p_detect_n, guess - p_detect_n, n);
        r.returned_fidelity = Some(f_ret);
        if best.as_ref().is_none_or(|b| r.p_succ_overall > b.p_succ_overall) {
            best = Some(r);
        }
    }
    Ok(best.expect("two assignments evaluated"))
}

fn p2_phi(family: &StateFamily) -> Result<f64> {
    match *family {
        StateFamily::CoinFlip4 { phi } => Ok(phi),
        _ => Err(Error::InvalidArgument("four-state attack needs the CoinFlip4 family".into())),
    }
}

/// Symmetric measurement basis {v, v⊥} for two (nearly) pure states with
/// principal vectors `a` and `b`: v and v⊥ make equal angles with a and b.
pub fn symmetric_basis(a: &PureState, b: &PureState) -> Option<(PureState, PureState)> {
    let ov = a.inner(b);
    let phase = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { C64::new(1.0, 0.0) };
    let bb: Vec<C64> = b.amplitudes().iter().map(|z| z * phase).collect();
    let plus = PureState::normalized(a.amplitudes().iter().zip(&bb).map(|(x, y)| x + y).collect()).ok()?;
    let minus = PureState::normalized(a.amplitudes().iter().zip(&bb).map(|(x, y)| x - y).collect()).ok()?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let v = PureState::normalized(plus.amplitudes().iter().zip(minus.amplitudes()).map(|(p, m)| (p + m) * r).collect())
        .ok()?;
    let w = PureState::normalized(plus.amplitudes().iter().zip(minus.amplitudes()).map(|(p, m)| (p - m) * r).collect())
        .ok()?;
    Some((v, w))
}

fn projective_success(rho_a0: &DensityMatrix, rho_a1: &DensityMatrix) -> f64 {
    match symmetric_basis(&rho_a0.principal_vector(), &rho_a1.principal_vector()) {
        Some((v, w)) => 0.5 * (rho_a0.overlap(&v) + rho_a1.overlap(&w)),
        None => 0.5,
    }
}

/// Attack model I on the four-state protocol: Bob measures the joint cloner
/// output in the basis {v, v⊥} symmetric about the outputs for |φ_{0,0}>
/// (a = 0) and |φ_{1,1}> (a = 1), and likewise for the pair |φ_{1,0}>,
/// |φ_{0,1}>; p_disc averages the two pairs. For the ideal cloner this equals
/// ½ + ½√(1 − s²) with s = sin 2φ.
pub fn attack_p2_global(cloner: &ClonerHandle, family: &StateFamily) -> Result<AttackReport> {
    let phi = p2_phi(family)?;
    cloner.check_family("four-state", |f| f == family)?;
    let joint = |x: u8, a: u8| -> Result<DensityMatrix> {
        match cloner {
            ClonerHandle::Learned { .. } => Ok(cloner.learned_output(&coinflip4_state(phi, x, a))?.joint),
            ClonerHandle::Analytic => {
                // pair partner has the other value of both bits
                let (me, partner) = (coinflip4_state(phi, x, a), coinflip4_state(phi, x ^ 1, a ^ 1));
                Ok(sdqcm_outputs(&me, &partner)?.0.to_density())
            }
        }
    };
    let p_first = projective_success(&joint(0, 0)?, &joint(1, 1)?);
    let p_second = projective_success(&joint(1, 0)?, &joint(0, 1)?);
    let p = 0.5 * (p_first + p_second);
    Ok(AttackReport::new("P2", "I", p, 0.0, 0.0, p, 1))
}

/// Attack model II on the four-state protocol: Bob keeps one clone and
/// discriminates ρ_{a=0} = ½(ρ_{00} + ρ_{10}) from ρ_{a=1} = ½(ρ_{01} + ρ_{11}).
/// For a learned cloner the success is averaged over the two clone registers.
pub fn attack_p2_local_4state(cloner: &ClonerHandle, family: &StateFamily) -> Result<AttackReport> {
    let phi = p2_phi(family)?;
    cloner.check_family("four-state", |f| f == family)?;
    let p = match cloner {
        ClonerHandle::Analytic => {
            let c = |x, a| coinflip4_ideal_clone(phi, x, a);
            helstrom(&c(0, 0).mix(&c(1, 0), 0.5)?, &c(0, 1).mix(&c(1, 1), 0.5)?, 0.5)?
        }
        ClonerHandle::Learned { .. } => {
            let out = |x, a| cloner.learned_output(&coinflip4_state(phi, x, a)).map(|o| o.clones);
            let (c00, c10, c01, c11) = (out(0, 0)?, out(1, 0)?, out(0, 1)?, out(1, 1)?);
            let mut total = 0.0;
            for j in 0..2 {
                total += helstrom(&c00[j].mix(&c10[j], 0.5)?, &c01[j].mix(&c11[j], 0.5)?, 0.5)?;
            }
            total / 2.0
        }
    };
    Ok(AttackReport::new("P2", "II", p, 0.0, 0.0, p, 1))
}

/// Bounds on the attack-II success with a two-state cloner of local fidelity
/// `f_local` for overlap `s`, using α − β = √((1 − s²)/(1 − s⁴)):
/// with F' = F_L + (s² − 1)(α − β), ½ + ½(1 − √F') ≤ P ≤ ½ + ½√(1 − F').
pub fn attack_p2_local_2state_bounds(f_local: f64, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("overlap s={s} outside (0,1)")));
    }
    if !(f_local > 0.5 && f_local <= 1.0) {
        return Err(Error::InvalidArgument(format!("local fidelity {f_local} outside (1/2, 1]")));
    }
    let ab = ((1.0 - s * s) / (1.0 - s.powi(4))).sqrt();
    let f_other = f_local + (s * s - 1.0) * ab;
    if !(0.0..=1.0).contains(&f_other) {
        return Err(Error::InvalidArgument(format!("fidelity {f_local} inconsistent with overlap {s}")));
    }
    Ok((0.5 + 0.5 * (1.0 - f_other.sqrt()), 0.5 + 0.5 * (1.0 - f_other).sqrt()))
}

/// Mean Uhlmann fidelity of a cloner's clones against the ideal outputs
/// (diagnostic for learned cloners).
pub fn mean_clone_fidelity(outputs: &[(PureState, ClonerOutput)]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (psi, out) in outputs {
        for c in &out.clones {
            total += fidelity(&psi.to_density(), c)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidArgument("no outputs".into()));
    }
    Ok(total / count as f64)
}
