//! Input-state families, their samplers, and closed-form optimal cloning
//! fidelities used as oracles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{c, kron, partial_trace, re, ComplexMatrix, DensityMatrix, PureState, C64};
use crate::rng::{substream, Rng};

/// A set of pure single-qubit input states.
///
/// * `PhaseCovariant`: (|0> + e^{iη}|1>)/√2 with η uniform on [0, 2π).
/// * `FixedOverlap`: cos φ|0> + sin φ|1> and sin φ|0> + cos φ|1>, overlap sin 2φ.
/// * `CoinFlip2`: cos φ|0> ± sin φ|1>, overlap cos 2φ (two-state coin flipping).
/// * `CoinFlip4`: |φ_{x,0}> = cos φ|0> + (−1)^x sin φ|1>,
///   |φ_{x,1}> = sin φ|0> + (−1)^{x⊕1} cos φ|1> (four-state coin flipping).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", try_from = "FamilyDescriptor")]
pub enum StateFamily {
    PhaseCovariant,
    FixedOverlap { phi: f64 },
    CoinFlip2 { phi: f64 },
    CoinFlip4 { phi: f64 },
}

/// Config form of a family: `{"kind": ..., "phi": x}` or `{"kind": ..., "s": x}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDescriptor {
    kind: String,
    phi: Option<f64>,
    s: Option<f64>,
}

impl TryFrom<FamilyDescriptor> for StateFamily {
    type Error = String;

    fn try_from(d: FamilyDescriptor) -> std::result::Result<Self, String> {
        let angle = |from_s: fn(f64) -> f64| -> std::result::Result<f64, String> {
            match (d.phi, d.s) {
                (Some(p), None) => Ok(p),
                (None, Some(s)) if s > 0.0 && s < 1.0 => Ok(from_s(s)),
                (None, Some(s)) => Err(format!("overlap s={s} outside (0,1)")),
                (Some(_), Some(_)) => Err("give either phi or s, not both".into()),
                (None, None) => Err(format!("family '{}' needs phi or s", d.kind)),
            }
        };
        let fam = match d.kind.as_str() {
            "PhaseCovariant" => StateFamily::PhaseCovariant,
            "FixedOverlap" => StateFamily::FixedOverlap { phi: angle(|s| 0.5 * s.asin())? },
            "CoinFlip2" => StateFamily::CoinFlip2 { phi: angle(|s| 0.5 * s.acos())? },
            "CoinFlip4" => StateFamily::CoinFlip4 { phi: angle(|s| 0.5 * s.asin())? },
            other => return Err(format!("unknown family kind '{other}'")),
        };
        fam.validate().map_err(|e| e.to_string())?;
        Ok(fam)
    }
}

/// Family-specific tag of a sampled state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SampleLabel {
    Phase(f64),
    Index(usize),
    Bits { x: u8, a: u8 },
}

/// One pure input state with its label.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSample {
    pub state: PureState,
    pub label: SampleLabel,
}

impl StateFamily {
    /// Two-state coin-flipping states with angle π/18 (overlap cos π/9).
    pub fn p1() -> Self {
        StateFamily::CoinFlip2 { phi: PI / 18.0 }
    }

    /// Four-state coin-flipping states with angle π/8.
    pub fn p2() -> Self {
        StateFamily::CoinFlip4 { phi: PI / 8.0 }
    }

    /// Fixed-overlap pair with the given overlap.
    pub fn fixed_overlap(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidArgument(format!("overlap s={s} outside (0,1)")));
        }
        Ok(StateFamily::FixedOverlap { phi: 0.5 * s.asin() })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateFamily::PhaseCovariant => Ok(()),
            StateFamily::FixedOverlap { phi } | StateFamily::CoinFlip2 { phi } | StateFamily::CoinFlip4 { phi } => {
                if phi > 0.0 && phi < PI / 4.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("angle phi={phi} outside (0, π/4)")))
                }
            }
        }
    }

    /// Overlap of the relevant pair (None for the continuous family).
    pub fn overlap(&self) -> Option<f64> {
        match *self {
            StateFamily::PhaseCovariant => None,
            StateFamily::FixedOverlap { phi } | StateFamily::CoinFlip4 { phi } => Some((2.0 * phi).sin()),
            StateFamily::CoinFlip2 { phi } => Some((2.0 * phi).cos()),
        }
    }

    /// Measure of the family: 4π for phase-covariant states, the number of
    /// states for the finite families.
    pub fn normalization(&self) -> f64 {
        match self {
            StateFamily::PhaseCovariant => 4.0 * PI,
            StateFamily::FixedOverlap { .. } | StateFamily::CoinFlip2 { .. } => 2.0,
            StateFamily::CoinFlip4 { .. } => 4.0,
        }
    }

    /// All states of a finite family; None for the continuous family.
    pub fn states(&self) -> Option<Vec<StateSample>> {
        let qubit = |a: f64, b: f64| PureState::qubit(re(a), re(b)).expect("non-zero");
        match *self {
            StateFamily::PhaseCovariant => None,
            StateFamily::FixedOverlap { phi } => {
                let (s, co) = phi.sin_cos();
                Some(vec![
                    StateSample { state: qubit(co, s), label: SampleLabel::Index(0) },
                    StateSample { state: qubit(s, co), label: SampleLabel::Index(1) },
                ])
            }
            StateFamily::CoinFlip2 { phi } => {
                let (s, co) = phi.sin_cos();
                Some(vec![
                    StateSample { state: qubit(co, s), label: SampleLabel::Index(0) },
                    StateSample { state: qubit(co, -s), label: SampleLabel::Index(1) },
                ])
            }
            StateFamily::CoinFlip4 { phi } => {
                let mut out = Vec::with_capacity(4);
                for x in 0..2u8 {
                    for a in 0..2u8 {
                        out.push(StateSample { state: coinflip4_state(phi, x, a), label: SampleLabel::Bits { x, a } });
                    }
                }
                Some(out)
            }
        }
    }

    /// Draws `count` samples: η uniform on [0, 2π) for the continuous family,
    /// uniform over the finite set otherwise.
    pub fn sample(&self, count: usize, rng: &mut Rng) -> Vec<StateSample> {
        match self.states() {
            None => (0..count)
                .map(|_| {
                    let eta = rng.random_range(0.0..2.0 * PI);
                    StateSample { state: phase_covariant_state(eta), label: SampleLabel::Phase(eta) }
                })
                .collect(),
            Some(all) => (0..count).map(|_| all[rng.random_range(0..all.len())].clone()).collect(),
        }
    }
}

/// Draws `count` samples from the "sampling" stream of `seed`.
pub fn sample(family: &StateFamily, count: usize, seed: u64) -> Result<Vec<StateSample>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    family.validate()?;
    Ok(family.sample(count, &mut substream(seed, "sampling")))
}

/// (|0> + e^{iη}|1>)/√2.
pub fn phase_covariant_state(eta: f64) -> PureState {
    let (s, co) = eta.sin_cos();
    PureState::new(vec![re(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2 * co, FRAC_1_SQRT_2 * s)]).expect("normalized")
}

/// |φ_{x,a}> of the four-state protocol.
pub fn coinflip4_state(phi: f64, x: u8, a: u8) -> PureState {
    let (s, co) = phi.sin_cos();
    let sign = |bit: u8| if bit & 1 == 1 { -1.0 } else { 1.0 };
    let amps = if a == 0 { [co, sign(x) * s] } else { [s, sign(x ^ 1) * co] };
    PureState::new(vec![re(amps[0]), re(amps[1])]).expect("normalized")
}

/// Optimal local fidelity of universal M -> N cloning:
/// M/N + (N − M)(M + 1)/(N(M + 2)).
pub fn optimal_local_universal(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= M <= N, got M={m} N={n}")));
    }
    // one division of exact integers, so rational values round correctly
    let num = m * (m + 2) + (n - m) * (m + 1);
    Ok(num as f64 / (n * (m + 2)) as f64)
}

/// Optimal global fidelity of universal M -> N cloning, N!(M+1)!/(M!(N+1)!).
pub fn optimal_global_universal(m: usize, n: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= M <= N, got M={m} N={n}")));
    }
    Ok((m as f64 + 1.0) / (n as f64 + 1.0))
}

fn check_overlap(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("overlap s={s} outside (0,1)")))
    }
}

/// Optimal local fidelity of symmetric 1 -> 2 cloning of two states with overlap s.
pub fn optimal_local_fixed_overlap(s: f64) -> Result<f64> {
    check_overlap(s)?;
    let r = (1.0 - 2.0 * s + 9.0 * s * s).sqrt();
    let inner = -1.0 + 2.0 * s + 3.0 * s * s + (1.0 - s) * r;
    Ok(0.5 + 2f64.sqrt() / (32.0 * s) * (1.0 + s) * (3.0 - 3.0 * s + r) * inner.max(0.0).sqrt())
}

/// Optimal global fidelity of M -> N cloning of two states with overlap s:
/// ½(1 + s^{M+N} + √(1 − s^{2M})√(1 − s^{2N})).
pub fn optimal_global_fixed_overlap(s: f64, m: usize, n: usize) -> Result<f64> {
    check_overlap(s)?;
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= M <= N, got M={m} N={n}")));
    }
    let (m, n) = (m as i32, n as i32);
    Ok(0.5 * (1.0 + s.powi(m + n) + (1.0 - s.powi(2 * m)).sqrt() * (1.0 - s.powi(2 * n)).sqrt()))
}

/// Local fidelity of the clones produced by the globally optimal
/// state-dependent M -> N cloner.
pub fn local_from_global_sdqcm(s: f64, m: usize, n: usize) -> Result<f64> {
    check_overlap(s)?;
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= M < N, got M={m} N={n}")));
    }
    let (m, n) = (m as i32, n as i32);
    let (sm, sn, s2) = (s.powi(m), s.powi(n), s * s);
    let t1 = (1.0 + sm) / (1.0 + sn) * (1.0 + s2 + 2.0 * sn);
    let t2 = (1.0 - sm) / (1.0 - sn) * (1.0 + s2 - 2.0 * sn);
    let t3 = 2.0 * (1.0 - s.powi(2 * m)) / (1.0 - s.powi(2 * n)) * (1.0 - s2);
    Ok(0.25 * (t1 + t2 + t3))
}

/// Optimal (local, global) fidelities of 1 -> 2 phase-covariant cloning.
pub fn optimal_phase_covariant() -> (f64, f64) {
    let r2 = 2f64.sqrt();
    (0.5 * (1.0 + 1.0 / r2), (1.0 + r2).powi(2) / 8.0)
}

/// Output of the Cerf phase-covariant cloner on (|0> + e^{iφ}|1>)/√2 with
/// shrinking angle η. Qubit order: clone B, clone E, ancilla.
pub fn cerf_pc_clone(eta: f64, input_phase: f64) -> Result<DensityMatrix> {
    if !(0.0..=PI / 2.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta={eta} outside [0, π/2]")));
    }
    let (se, ce) = eta.sin_cos();
    let ph = C64::from_polar(1.0, input_phase);
    // index = 4·B + 2·E + ancilla
    let mut amps = vec![re(0.0); 8];
    amps[0b000] = re(0.5);
    amps[0b010] = ph * (0.5 * se);
    amps[0b100] = ph * (0.5 * ce);
    amps[0b111] = ph * 0.5;
    amps[0b011] = re(0.5 * ce);
    amps[0b101] = re(0.5 * se);
    Ok(PureState::new(amps)?.to_density())
}

/// Global fidelity of the Cerf cloner, ⅛(1 + sin η + cos η)².
pub fn cerf_global_fidelity(eta: f64) -> f64 {
    (1.0 + eta.sin() + eta.cos()).powi(2) / 8.0
}

/// Optimal asymmetric universal 1 -> 2 fidelities for Bob's parameter p:
/// F_B = 1 − p²/2 and F_E = 1 − ¼(2 − p² − p√(4 − 3p²)).
pub fn asym_fidelity_pair(p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p={p} outside [0,1]")));
    }
    let f_b = 1.0 - p * p / 2.0;
    let f_e = 1.0 - 0.25 * (2.0 - p * p - p * (4.0 - 3.0 * p * p).sqrt());
    Ok((f_b, f_e))
}

/// Global outputs of the optimal symmetric 1 -> 2 cloner for the pair
/// (`a`, `b`) (two-qubit pure states, clone registers 0 and 1).
///
/// In the symmetric basis e± ∝ a ± b the outputs are
/// x|++> ± y(|+−> + |−+>)/√2 + z|−−> with y² = (1 − s)/2 and x² + z² = (1 + s)/2,
/// which preserves the overlap; the remaining angle maximizes the local fidelity.
pub fn sdqcm_outputs(a: &PureState, b: &PureState) -> Result<(PureState, PureState)> {
    if a.num_qubits() != 1 || b.num_qubits() != 1 {
        return Err(Error::InvalidArgument("state-dependent cloner needs single-qubit inputs".into()));
    }
    let ov = a.inner(b);
    let s = ov.norm();
    check_overlap(s)?;
    // rephase b so that <a|b> is real and positive
    let phase = if s > 0.0 { ov.conj() / s } else { re(1.0) };
    let b_amps: Vec<C64> = b.amplitudes().iter().map(|z| z * phase).collect();
    let plus = PureState::normalized(a.amplitudes().iter().zip(&b_amps).map(|(x, y)| x + y).collect())?;
    let minus = PureState::normalized(a.amplitudes().iter().zip(&b_amps).map(|(x, y)| x - y).collect())?;
    let y = ((1.0 - s) / 2.0).sqrt();
    let r = ((1.0 + s) / 2.0).sqrt();
    let build = |omega: f64, sign: f64| -> PureState {
        let (x, z) = (r * omega.cos(), r * omega.sin());
        let pp = plus.tensor(&plus);
        let pm = plus.tensor(&minus);
        let mp = minus.tensor(&plus);
        let mm = minus.tensor(&minus);
        let amps = (0..4)
            .map(|i| {
                pp.amplitudes()[i] * x
                    + (pm.amplitudes()[i] + mp.amplitudes()[i]) * (sign * y * FRAC_1_SQRT_2)
                    + mm.amplitudes()[i] * z
            })
            .collect();
        PureState::normalized(amps).expect("non-zero")
    };
    let local = |omega: f64| -> f64 {
        let out = build(omega, 1.0).to_density();
        partial_trace(&out, &[0]).expect("valid").overlap(a)
    };
    let omega = golden_max(local, 0.0, PI / 2.0);
    let out_a = build(omega, 1.0);
    let out_b_raw = build(omega, -1.0);
    // undo the rephasing of b on both output copies (global phase only)
    let undo = phase.conj() * phase.conj();
    let out_b = PureState::new(out_b_raw.amplitudes().iter().map(|z| z * undo).collect())?;
    Ok((out_a, out_b))
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Coefficients (α, β, γ) of a single-qubit state written as
/// α|a><a| + β|b><b| + γ(|a><b| + |b><a|) for real states a, b.
pub fn pair_coefficients(rho: &DensityMatrix, a: &PureState, b: &PureState) -> Result<(f64, f64, f64)> {
    if rho.num_qubits() != 1 {
        return Err(Error::InvalidArgument("coefficients need a single-qubit state".into()));
    }
    let m = rho.matrix();
    let (a0, a1, b0, b1) = (a.amplitudes()[0].re, a.amplitudes()[1].re, b.amplitudes()[0].re, b.amplitudes()[1].re);
    // rows: (0,0), (1,1), (0,1) entries of α aaᵀ + β bbᵀ + γ(abᵀ + baᵀ)
    let sys = [
        [a0 * a0, b0 * b0, 2.0 * a0 * b0, m.get(0, 0).re],
        [a1 * a1, b1 * b1, 2.0 * a1 * b1, m.get(1, 1).re],
        [a0 * a1, b0 * b1, a0 * b1 + b0 * a1, m.get(0, 1).re],
    ];
    let sol = solve3(sys).ok_or_else(|| Error::Numerical("singular coefficient system".into()))?;
    Ok((sol[0], sol[1], sol[2]))
}

fn solve3(mut a: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let pivot = a[col];
                let f = a[row][col] / pivot[col];
                for (x, p) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Bloch shrinking factors (η_x, η_z) of the ideal four-state cloner.
pub fn coinflip4_shrinking(phi: f64) -> (f64, f64) {
    let (s2, c2) = ((2.0 * phi).sin().powi(2), (2.0 * phi).cos().powi(2));
    let norm = (s2 * s2 + c2 * c2).sqrt();
    (s2 / norm, c2 / norm)
}

/// Bloch vector m_{x,a} of |φ_{x,a}>.
pub fn coinflip4_bloch(phi: f64, x: u8, a: u8) -> [f64; 3] {
    let (s, co) = ((2.0 * phi).sin(), (2.0 * phi).cos());
    match (x & 1, a & 1) {
        (0, 0) => [s, 0.0, co],
        (0, _) => [-s, 0.0, -co],
        (_, 0) => [-s, 0.0, co],
        _ => [s, 0.0, -co],
    }
}

/// Single clone of the ideal four-state cloner: ½(1 + η_x m_x X + η_z m_z Z).
pub fn coinflip4_ideal_clone(phi: f64, x: u8, a: u8) -> DensityMatrix {
    let (ex, ez) = coinflip4_shrinking(phi);
    let m = coinflip4_bloch(phi, x, a);
    DensityMatrix::from_bloch([ex * m[0], 0.0, ez * m[2]]).expect("shrunk Bloch vector")
}

/// |psi><psi|^{⊗n} as a matrix.
pub fn projector_power(psi: &PureState, n: usize) -> ComplexMatrix {
    let p = psi.to_density().matrix().clone();
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..n {
        out = kron(&out, &p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_accepts_phi_or_s() {
        let f: StateFamily = serde_json::from_str(r#"{"kind":"CoinFlip4","phi":0.39269908169872414}"#).unwrap();
        assert_eq!(f, StateFamily::p2());
        let g: StateFamily = serde_json::from_str(r#"{"kind":"FixedOverlap","s":0.5}"#).unwrap();
        assert!((g.overlap().unwrap() - 0.5).abs() < 1e-15);
        let pc: StateFamily = serde_json::from_str(r#"{"kind":"PhaseCovariant"}"#).unwrap();
        assert_eq!(pc, StateFamily::PhaseCovariant);
        assert!(serde_json::from_str::<StateFamily>(r#"{"kind":"CoinFlip4","phi":1.0}"#).is_err());
        assert!(serde_json::from_str::<StateFamily>(r#"{"kind":"Nope"}"#).is_err());
        assert!(serde_json::from_str::<StateFamily>(r#"{"kind":"FixedOverlap"}"#).is_err());
    }

    #[test]
    fn family_round_trips_through_json() {
        for f in
            [StateFamily::PhaseCovariant, StateFamily::p1(), StateFamily::p2(), StateFamily::FixedOverlap { phi: 0.3 }]
        {
            let text = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<StateFamily>(&text).unwrap(), f);
        }
    }

    #[test]
    fn range_errors() {
        assert!(optimal_local_universal(3, 2).is_err());
        assert!(optimal_local_fixed_overlap(1.0).is_err());
        assert!(optimal_global_fixed_overlap(0.5, 2, 1).is_err());
        assert!(local_from_global_sdqcm(0.5, 2, 2).is_err());
        assert!(cerf_pc_clone(2.0, 0.0).is_err());
        assert!(asym_fidelity_pair(1.5).is_err());
        assert!(sample(&StateFamily::PhaseCovariant, 0, 1).is_err());
    }
}
