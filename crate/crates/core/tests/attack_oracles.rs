//! State discrimination, majority voting and the coin-flipping attacks.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use common::{random_density, random_pure, rng};
use proptest::prelude::*;
use vqclone_core::attack::{
    attack_p1, attack_p2_global, attack_p2_local_2state_bounds, attack_p2_local_4state, helstrom,
    majority_vote_success, mean_clone_fidelity, symmetric_basis,
};
use vqclone_core::families::{coinflip4_state, optimal_local_fixed_overlap};
use vqclone_core::qmath::{trace_distance, DensityMatrix, PureState};
use vqclone_core::{CloneTask, ClonerHandle, GateSequence, GateSpec, StateFamily};

#[test]
fn helstrom_limits() {
    let mut r = rng(1);
    let rho = random_density(1, &mut r);
    assert_abs_diff_eq!(helstrom(&rho, &rho, 0.5).unwrap(), 0.5, epsilon = 1e-12);
    let zero = DensityMatrix::from_pure(&PureState::basis(1, 0));
    let one = DensityMatrix::from_pure(&PureState::basis(1, 1));
    assert_abs_diff_eq!(helstrom(&zero, &one, 0.5).unwrap(), 1.0, epsilon = 1e-12);
    // a certain prior needs no measurement
    assert_abs_diff_eq!(helstrom(&rho, &zero, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    assert!(helstrom(&rho, &random_density(2, &mut r), 0.5).is_err());
    assert!(helstrom(&rho, &rho, 1.5).is_err());
}

#[test]
fn helstrom_equals_half_plus_half_trace_distance_for_equal_priors() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = random_density(2, &mut r);
        let b = random_density(2, &mut r);
        let want = 0.5 + 0.5 * trace_distance(&a, &b).unwrap();
        assert_abs_diff_eq!(helstrom(&a, &b, 0.5).unwrap(), want, epsilon = 1e-9);
    }
}

#[test]
fn helstrom_for_two_pure_states() {
    // ½(1 + √(1 − |<a|b>|²)) for pure states and equal priors
    let mut r = rng(3);
    for _ in 0..20 {
        let a = random_pure(1, &mut r);
        let b = random_pure(1, &mut r);
        let ov = a.inner(&b).norm_sqr();
        let got = helstrom(&a.to_density(), &b.to_density(), 0.5).unwrap();
        assert_abs_diff_eq!(got, 0.5 * (1.0 + (1.0 - ov).sqrt()), epsilon = 1e-9);
    }
}

#[test]
fn majority_vote_closed_forms() {
    // n = 1: the single guess; n = 3: q³ + 3q²p
    let p = 0.3;
    let q = 1.0 - p;
    assert_abs_diff_eq!(majority_vote_success(p, 1).unwrap(), q, epsilon = 1e-15);
    assert_abs_diff_eq!(majority_vote_success(p, 3).unwrap(), q.powi(3) + 3.0 * q * q * p, epsilon = 1e-15);
    // n = 2 with a fair tie-break equals n = 1
    assert_abs_diff_eq!(majority_vote_success(p, 2).unwrap(), q, epsilon = 1e-15);
    assert!(majority_vote_success(p, 3).unwrap() > majority_vote_success(p, 1).unwrap());
    assert!(majority_vote_success(p, 0).is_err());
    assert!(majority_vote_success(1.5, 3).is_err());
}

#[test]
fn majority_vote_amplifies_towards_certainty() {
    let mut last = 0.0;
    for n in (1..=25).step_by(2) {
        let s = majority_vote_success(0.3, n).unwrap();
        assert!(s >= last - 1e-15);
        last = s;
    }
    assert!(last > 0.97);
    assert!(majority_vote_success(0.3, 301).unwrap() > 1.0 - 1e-9);
    assert_abs_diff_eq!(majority_vote_success(0.5, 11).unwrap(), 0.5, epsilon = 1e-12);
}

#[test]
fn symmetric_basis_is_orthonormal_and_symmetric() {
    let mut r = rng(4);
    for _ in 0..10 {
        let a = random_pure(2, &mut r);
        let b = random_pure(2, &mut r);
        let (v, w) = symmetric_basis(&a, &b).unwrap();
        assert_abs_diff_eq!(v.inner(&w).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.inner(&v).norm(), 1.0, epsilon = 1e-12);
        // a sits as close to v as b sits to w
        assert_abs_diff_eq!(a.inner(&v).norm(), b.inner(&w).norm(), epsilon = 1e-9);
    }
}

#[test]
fn four_state_attacks_with_ideal_cloners() {
    let fam = StateFamily::p2();
    let i = attack_p2_global(&ClonerHandle::Analytic, &fam).unwrap();
    // ½ + ½√(1 − s²) with s = sin(π/4)
    assert_abs_diff_eq!(i.p_disc, 0.5 + 0.5 * FRAC_1_SQRT_2, epsilon = 1e-9);
    assert_abs_diff_eq!(i.bias, 0.353, epsilon = 1e-3);
    let ii = attack_p2_local_4state(&ClonerHandle::Analytic, &fam).unwrap();
    assert_abs_diff_eq!(ii.p_disc, 0.75, epsilon = 1e-9);
    assert_abs_diff_eq!(ii.bias, 0.25, epsilon = 1e-9);
}

#[test]
fn four_state_attacks_vanish_as_the_pairs_merge() {
    // s = sin 2φ → 1 (φ → π/4) makes |φ_{0,0}> and |φ_{1,1}> coincide
    let mut prev = 1.0;
    for phi in [0.6, 0.7, 0.75, 0.78, FRAC_PI_4 - 1e-4] {
        let fam = StateFamily::CoinFlip4 { phi };
        let i = attack_p2_global(&ClonerHandle::Analytic, &fam).unwrap();
        let s = (2.0 * phi).sin();
        assert_abs_diff_eq!(i.p_disc, 0.5 + 0.5 * (1.0 - s * s).sqrt(), epsilon = 1e-9);
        assert!(i.p_disc <= prev);
        prev = i.p_disc;
    }
    assert_abs_diff_eq!(prev, 0.5, epsilon = 1e-3);
    let ii =
        attack_p2_local_4state(&ClonerHandle::Analytic, &StateFamily::CoinFlip4 { phi: FRAC_PI_4 - 1e-4 }).unwrap();
    assert_abs_diff_eq!(ii.p_disc, 0.5, epsilon = 1e-3);
}

#[test]
fn two_state_bounds_for_the_four_state_protocol() {
    let s = (2.0 * PI / 8.0).sin();
    let f = optimal_local_fixed_overlap(s).unwrap();
    let (lo, hi) = attack_p2_local_2state_bounds(f, s).unwrap();
    assert_abs_diff_eq!(lo, 0.619, epsilon = 5e-3);
    assert_abs_diff_eq!(hi, 0.823, epsilon = 5e-3);
    assert!(lo <= hi);
    assert!(attack_p2_local_2state_bounds(f, 1.0).is_err());
    assert!(attack_p2_local_2state_bounds(0.4, s).is_err());
}

#[test]
fn two_state_bounds_fall_with_fidelity_and_merge_for_identical_states() {
    let s = FRAC_1_SQRT_2;
    let (mut prev_lo, mut prev_hi) = (1.0, 1.0);
    for f in [0.9, 0.93, 0.96, 0.99] {
        let (lo, hi) = attack_p2_local_2state_bounds(f, s).unwrap();
        assert!(lo <= hi + 1e-12);
        assert!(lo <= prev_lo && hi <= prev_hi);
        (prev_lo, prev_hi) = (lo, hi);
    }
    let (lo, hi) = attack_p2_local_2state_bounds(1.0, 1.0 - 1e-9).unwrap();
    assert_abs_diff_eq!(lo, 0.5, epsilon = 1e-3);
    assert_abs_diff_eq!(hi, 0.5, epsilon = 1e-3);
}

#[test]
fn two_state_attack_with_the_optimal_cloner() {
    let r = attack_p1(&ClonerHandle::Analytic, &StateFamily::p1(), 1).unwrap();
    assert!(r.p_disc > 0.5 && r.p_disc < 1.0);
    let f = r.returned_fidelity.unwrap();
    // the optimal symmetric cloner for overlap cos(π/9)
    assert_abs_diff_eq!(f, optimal_local_fixed_overlap((PI / 9.0).cos()).unwrap(), epsilon = 1e-6);
    assert_abs_diff_eq!(r.p_detect, 1.0 - f, epsilon = 1e-12);
    assert_abs_diff_eq!(r.bias, r.p_succ_overall - 0.5, epsilon = 1e-15);
    // more rounds: the vote helps, detection compounds
    let r5 = attack_p1(&ClonerHandle::Analytic, &StateFamily::p1(), 5).unwrap();
    assert!(r5.p_detect_aggregate > r.p_detect_aggregate);
    assert_abs_diff_eq!(r5.p_detect_aggregate, 1.0 - f.powi(5), epsilon = 1e-12);
    assert!(attack_p1(&ClonerHandle::Analytic, &StateFamily::p1(), 0).is_err());
    assert!(attack_p1(&ClonerHandle::Analytic, &StateFamily::p2(), 1).is_err());
}

#[test]
fn pass_through_cloner_takes_the_better_register_assignment() {
    // The identity leaves the input on register 0 and |0> on register 1.
    let fam = StateFamily::p1();
    let task = CloneTask::standard(1, 2, 0, fam.clone()).unwrap();
    let seq = GateSequence::from_specs(&[GateSpec::rz(0)]).unwrap();
    let handle = ClonerHandle::Learned { task, seq, theta: vec![0.0] };
    let r = attack_p1(&handle, &fam, 1).unwrap();
    let states = fam.states().unwrap();
    let (phi0, phi1) = (states[0].state.to_density(), states[1].state.to_density());
    let blank = DensityMatrix::from_pure(&PureState::basis(1, 0));
    // return the input (F = 1), keep the blank
    let keep_blank = 0.5
        * (helstrom(&phi0.tensor(&phi1), &phi1.tensor(&blank), 0.5).unwrap()
            + helstrom(&phi1.tensor(&phi0), &phi0.tensor(&blank), 0.5).unwrap());
    // return the blank, keep the input
    let f_blank = 0.5 * (blank.overlap(&states[0].state) + blank.overlap(&states[1].state));
    let keep_input = 0.5
        * (helstrom(&phi0.tensor(&phi1), &phi1.tensor(&phi0), 0.5).unwrap()
            + helstrom(&phi1.tensor(&phi0), &phi0.tensor(&phi1), 0.5).unwrap())
        - (1.0 - f_blank);
    assert_abs_diff_eq!(r.p_succ_overall, keep_blank.max(keep_input), epsilon = 1e-9);
}

#[test]
fn learned_handles_must_match_the_family() {
    let task = CloneTask::standard(1, 2, 0, StateFamily::p2()).unwrap();
    let seq = GateSequence::from_specs(&[GateSpec::rz(0)]).unwrap();
    let handle = ClonerHandle::Learned { task, seq, theta: vec![0.0] };
    assert!(attack_p1(&handle, &StateFamily::p1(), 1).is_err());
    assert!(attack_p2_global(&handle, &StateFamily::p2()).is_ok());
    assert!(attack_p2_global(&handle, &StateFamily::CoinFlip4 { phi: 0.3 }).is_err());
    assert!(ClonerHandle::Analytic.learned_output(&PureState::basis(1, 0)).is_err());
}

#[test]
fn mean_clone_fidelity_of_a_perfect_copy() {
    let task = CloneTask::standard(1, 1, 0, StateFamily::p2()).unwrap();
    let seq = GateSequence::from_specs(&[GateSpec::rz(0)]).unwrap();
    let handle = ClonerHandle::Learned { task, seq, theta: vec![0.0] };
    let psi = coinflip4_state(FRAC_PI_4 / 2.0, 1, 0);
    let out = handle.learned_output(&psi).unwrap();
    assert_abs_diff_eq!(mean_clone_fidelity(&[(psi, out)]).unwrap(), 1.0, epsilon = 1e-9);
    assert!(mean_clone_fidelity(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn helstrom_is_symmetric_and_bounded(seed in any::<u64>(), prior in 0.0f64..1.0) {
        let mut r = rng(seed);
        let a = random_density(1, &mut r);
        let b = random_density(1, &mut r);
        let p = helstrom(&a, &b, prior).unwrap();
        let q = helstrom(&b, &a, 1.0 - prior).unwrap();
        prop_assert!((p - q).abs() < 1e-9);
        prop_assert!(p >= prior.max(1.0 - prior) - 1e-9 && p <= 1.0);
    }

    #[test]
    fn majority_vote_stays_a_probability(p in 0.0f64..1.0, n in 1usize..40) {
        let s = majority_vote_success(p, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        if p < 0.5 && n % 2 == 1 {
            prop_assert!(s >= 1.0 - p - 1e-12);
        }
    }
}
