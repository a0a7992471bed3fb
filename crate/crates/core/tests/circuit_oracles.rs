//! Gate unitaries, circuit evolution, clone extraction and circuit files.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use common::{matmul, random_pure, rng};
use proptest::prelude::*;
use rand::Rng;
use vqclone_core::circuit::{
    build_unitary, clone_states, gate_unitary, ideal_cloning_ansatz, parse_circuit, parse_circuit_with_pool,
    run_clone_task, serialize_circuit, simulate,
};
use vqclone_core::cost::CostKind;
use vqclone_core::families::{cerf_pc_clone, optimal_phase_covariant, phase_covariant_state};
use vqclone_core::qmath::{c, partial_trace, re, ComplexMatrix, DensityMatrix, PureState};
use vqclone_core::train::{train, TrainConfig};
use vqclone_core::{CloneTask, GatePool, GateSequence, GateSpec, StateFamily};

const EXACT: f64 = 1e-12;

/// CNOT(c → t) as RY_t(−π/2) · CZ · RY_t(π/2).
fn cnot(specs: &mut Vec<GateSpec>, theta: &mut Vec<f64>, ctrl: usize, tgt: usize) {
    specs.extend([GateSpec::ry(tgt), GateSpec::cz(ctrl, tgt), GateSpec::ry(tgt)]);
    theta.extend([-FRAC_PI_2, 0.0, FRAC_PI_2]);
}

#[test]
fn rz_zero_is_identity_on_every_qubit() {
    for q in 0..3 {
        let u = gate_unitary(&GateSpec::rz(q), 0.0, 3).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(8)) < EXACT);
    }
}

#[test]
fn rx_pi_is_minus_i_x() {
    // exp(−iπX/2) = cos(π/2)·I − i·sin(π/2)·X = −iX
    let u = gate_unitary(&GateSpec::rx(0), PI, 1).unwrap();
    let want = ComplexMatrix::from_vec(2, vec![re(0.0), c(0.0, -1.0), c(0.0, -1.0), re(0.0)]).unwrap();
    assert!(u.max_abs_diff(&want) < EXACT);
}

#[test]
fn rotation_matrices_match_the_exponential_series() {
    let t: f64 = 0.73;
    let (s, co) = (t / 2.0).sin_cos();
    let ry = gate_unitary(&GateSpec::ry(0), t, 1).unwrap();
    let want = ComplexMatrix::from_real(2, &[co, -s, s, co]).unwrap();
    assert!(ry.max_abs_diff(&want) < EXACT);
    let rz = gate_unitary(&GateSpec::rz(0), t, 1).unwrap();
    let want = ComplexMatrix::diag(&[c(co, -s), c(co, s)]);
    assert!(rz.max_abs_diff(&want) < EXACT);
}

#[test]
fn cz_is_diagonal_and_involutive() {
    let u = gate_unitary(&GateSpec::cz(0, 1), 0.0, 2).unwrap();
    assert!(u.max_abs_diff(&ComplexMatrix::diag(&[re(1.0), re(1.0), re(1.0), re(-1.0)])) < EXACT);
    assert!(matmul(&u, &u).max_abs_diff(&ComplexMatrix::identity(4)) < EXACT);
}

#[test]
fn qubit_zero_is_most_significant() {
    // RX(π) on qubit 0 of two maps |00> to −i|10> = basis index 2.
    let seq = GateSequence::from_specs(&[GateSpec::rx(0)]).unwrap();
    let out = simulate(&seq, &[PI], PureState::basis(2, 0).amplitudes(), 2);
    assert!((out[2] - c(0.0, -1.0)).norm() < EXACT);
}

#[test]
fn empty_sequence_is_identity() {
    let seq = GateSequence::new(Arc::new(GatePool::phase_covariant()), vec![]).unwrap();
    assert!(build_unitary(&seq, &[], 3).unwrap().max_abs_diff(&ComplexMatrix::identity(8)) < EXACT);
}

#[test]
fn consecutive_rz_compose_additively() {
    let seq = GateSequence::from_specs(&[GateSpec::rz(1), GateSpec::rz(1)]).unwrap();
    let one = GateSequence::from_specs(&[GateSpec::rz(1)]).unwrap();
    let u = build_unitary(&seq, &[0.4, 1.1], 2).unwrap();
    let v = build_unitary(&one, &[1.5], 2).unwrap();
    assert!(u.max_abs_diff(&v) < EXACT);
}

#[test]
fn build_unitary_matches_explicit_chain_product() {
    let mut r = rng(11);
    let pool = GatePool::fully_connected(3);
    for _ in 0..10 {
        let g: Vec<usize> = (0..3).map(|_| r.random_range(0..pool.len())).collect();
        let seq = GateSequence::new(Arc::new(pool.clone()), g).unwrap();
        let theta: Vec<f64> = (0..3).map(|_| r.random_range(-PI..PI)).collect();
        let specs: Vec<GateSpec> = seq.specs().cloned().collect();
        let mut want = ComplexMatrix::identity(8);
        for (s, &t) in specs.iter().zip(&theta) {
            // later gates multiply from the left
            want = matmul(&gate_unitary(s, t, 3).unwrap(), &want);
        }
        assert!(build_unitary(&seq, &theta, 3).unwrap().max_abs_diff(&want) < EXACT);
    }
}

#[test]
fn identity_circuit_returns_the_input() {
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let seq = GateSequence::from_specs(&[GateSpec::rz(2)]).unwrap();
    let psi = phase_covariant_state(0.3);
    let input = task.prepare_input(&psi).unwrap();
    let rho = run_clone_task(&task, &seq, &[0.0], &input).unwrap();
    assert!(rho.matrix().max_abs_diff(input.to_density().matrix()) < EXACT);
    let clones = clone_states(&rho, &task).unwrap();
    assert_abs_diff_eq!(clones[0].overlap(&psi), 1.0, epsilon = EXACT);
    assert_abs_diff_eq!(clones[1].overlap(&PureState::basis(1, 0)), 1.0, epsilon = EXACT);
}

#[test]
fn swap_circuit_moves_the_input_to_the_second_register() {
    let task = CloneTask::standard(1, 2, 0, StateFamily::PhaseCovariant).unwrap();
    let (mut specs, mut theta) = (Vec::new(), Vec::new());
    cnot(&mut specs, &mut theta, 0, 1);
    cnot(&mut specs, &mut theta, 1, 0);
    cnot(&mut specs, &mut theta, 0, 1);
    let seq = GateSequence::from_specs(&specs).unwrap();
    let mut r = rng(12);
    for _ in 0..5 {
        let psi = random_pure(1, &mut r);
        let rho = run_clone_task(&task, &seq, &theta, &task.prepare_input(&psi).unwrap()).unwrap();
        let clones = clone_states(&rho, &task).unwrap();
        assert_abs_diff_eq!(clones[1].overlap(&psi), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(clones[0].overlap(&PureState::basis(1, 0)), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn bell_state_clones_are_maximally_mixed() {
    let task = CloneTask::standard(1, 2, 0, StateFamily::PhaseCovariant).unwrap();
    let bell = PureState::normalized(vec![re(1.0), re(0.0), re(0.0), re(1.0)]).unwrap().to_density();
    let mixed = DensityMatrix::maximally_mixed(1);
    for rho in clone_states(&bell, &task).unwrap() {
        assert!(rho.matrix().max_abs_diff(mixed.matrix()) < EXACT);
    }
}

#[test]
fn symmetric_cloner_gives_equal_reduced_states() {
    for eta in [0.0, 0.9, 2.5] {
        let out = cerf_pc_clone(FRAC_PI_4, eta).unwrap();
        let b = partial_trace(&out, &[0]).unwrap();
        let e = partial_trace(&out, &[1]).unwrap();
        assert!(b.matrix().max_abs_diff(e.matrix()) < 1e-6);
    }
}

#[test]
fn trained_fixed_network_reaches_the_phase_covariant_optimum() {
    let (seq, theta0, trainable) = ideal_cloning_ansatz();
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let mut theta = theta0.clone();
    let mut r = rng(0);
    for &p in &trainable {
        theta[p] = r.random_range(0.0..2.0 * PI);
    }
    let frozen = (0..seq.len()).filter(|p| !trainable.contains(p)).collect();
    let cfg = TrainConfig { epochs: 200, frozen, ..Default::default() };
    let out = train(&task, &seq, &theta, CostKind::Squared, &cfg).unwrap();
    let f_opt = optimal_phase_covariant().0;
    for f in &out.test_report.unwrap().per_clone_fidelities {
        assert_abs_diff_eq!(*f, f_opt, epsilon = 5e-3);
    }
}

#[test]
fn empty_circuit_round_trips() {
    let seq = GateSequence::new(Arc::new(GatePool::p1()), vec![]).unwrap();
    let text = serialize_circuit(&seq, &[]).unwrap();
    let (back, theta) = parse_circuit(&text).unwrap();
    assert!(back.is_empty() && theta.is_empty());
}

#[test]
fn two_qubit_coin_flip_circuit_round_trips_through_its_pool() {
    let pool = Arc::new(GatePool::p1());
    let specs = [GateSpec::ry(0), GateSpec::rz(1), GateSpec::cz(0, 1), GateSpec::ry(1), GateSpec::rx(0)];
    let g: Vec<usize> = specs.iter().map(|s| pool.index_of(s).unwrap()).collect();
    let seq = GateSequence::new(pool.clone(), g).unwrap();
    let theta = vec![1.2345678901, -0.5, 0.0, 2.0 * FRAC_1_SQRT_2, 3.1];
    let text = serialize_circuit(&seq, &theta).unwrap();
    let (back, back_theta) = parse_circuit_with_pool(&text, pool).unwrap();
    assert_eq!(back, seq);
    assert_eq!(back_theta, theta);
    // twelve significant digits survive the text form
    assert!((back_theta[0] - 1.2345678901).abs() < 1e-12);
}

#[test]
fn parsing_rejects_gates_outside_the_pool_and_bad_json() {
    let seq = GateSequence::from_specs(&[GateSpec::cz(0, 2)]).unwrap();
    let text = serialize_circuit(&seq, &[0.0]).unwrap();
    assert!(parse_circuit_with_pool(&text, Arc::new(GatePool::nearest_neighbour(3))).is_err());
    assert!(parse_circuit("[{\"kind\": \"RY\"}]").is_err());
    assert!(parse_circuit("not json").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sequences_are_unitary(g in proptest::collection::vec(0usize..15, 0..12), seed in any::<u64>()) {
        let pool = Arc::new(GatePool::fully_connected(3));
        let g: Vec<usize> = g.into_iter().map(|i| i % pool.len()).collect();
        let seq = GateSequence::new(pool, g).unwrap();
        let mut r = rng(seed);
        let theta: Vec<f64> = (0..seq.len()).map(|_| r.random_range(-PI..PI)).collect();
        let u = build_unitary(&seq, &theta, 3).unwrap();
        prop_assert!(matmul(&u.adjoint(), &u).max_abs_diff(&ComplexMatrix::identity(8)) < 1e-10);
    }

    #[test]
    fn serialization_round_trips(g in proptest::collection::vec(0usize..64, 0..20), seed in any::<u64>()) {
        let pool = Arc::new(GatePool::fully_connected(4));
        let g: Vec<usize> = g.into_iter().map(|i| i % pool.len()).collect();
        let seq = GateSequence::new(pool.clone(), g).unwrap();
        let mut r = rng(seed);
        let mut theta: Vec<f64> = (0..seq.len()).map(|_| r.random_range(-10.0..10.0)).collect();
        seq.sanitize(&mut theta);
        let (back, back_theta) = parse_circuit_with_pool(&serialize_circuit(&seq, &theta).unwrap(), pool).unwrap();
        prop_assert_eq!(back, seq);
        prop_assert_eq!(back_theta, theta);
    }
}
