//! Adam, SWAP-test sampling, the sample planner, and the structure search.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use common::{random_density, random_pure, rng};
use proptest::prelude::*;
use vqclone_core::circuit::build_unitary;
use vqclone_core::cost::evaluate;
use vqclone_core::families::sample;
use vqclone_core::qmath::DensityMatrix;
use vqclone_core::rng::substream;
use vqclone_core::search::{compress, draw_d, perturb, random_sequence, reduce, search};
use vqclone_core::train::{
    adam_step, plan_samples, swap_test_coverage, swap_test_estimate, train, AdamState, EstimatorConfig,
};
use vqclone_core::{
    Batch, CloneTask, CostKind, GatePool, GateSequence, GateSpec, SearchConfig, StateFamily, TrainConfig, C64,
};

#[test]
fn first_adam_step_moves_each_coordinate_by_the_learning_rate() {
    // bias correction makes m̂ = g and v̂ = g², so the first step is lr·sign(g)
    let cfg = TrainConfig::default();
    let mut theta = vec![0.3, -1.0, 2.0, 0.5];
    let start = theta.clone();
    let g = [0.7, -3.0, 1e-3, 5.0];
    let mut state = AdamState::new(4);
    adam_step(&mut theta, &g, &mut state, &cfg, &[true, true, true, false]).unwrap();
    for i in 0..3 {
        let step = start[i] - theta[i];
        assert_abs_diff_eq!(step.abs(), cfg.learning_rate, epsilon = 1e-6);
        assert_eq!(step.signum(), g[i].signum());
    }
    assert_eq!(theta[3], start[3]);
    assert_eq!(state.t, 1);
}

#[test]
fn zero_gradient_leaves_angles_unchanged() {
    let cfg = TrainConfig::default();
    let mut theta = vec![0.1, 0.2];
    let mut state = AdamState::new(2);
    for _ in 0..5 {
        adam_step(&mut theta, &[0.0, 0.0], &mut state, &cfg, &[true, true]).unwrap();
    }
    assert_eq!(theta, vec![0.1, 0.2]);
    assert!(adam_step(&mut theta, &[0.0], &mut state, &cfg, &[true, true]).is_err());
}

#[test]
fn adam_minimizes_a_quadratic() {
    let cfg = TrainConfig { learning_rate: 0.05, ..Default::default() };
    let target = [1.5, -0.5];
    let mut theta = vec![0.0, 0.0];
    let mut state = AdamState::new(2);
    for _ in 0..2000 {
        let g: Vec<f64> = theta.iter().zip(&target).map(|(t, c)| 2.0 * (t - c)).collect();
        adam_step(&mut theta, &g, &mut state, &cfg, &[true, true]).unwrap();
    }
    assert_abs_diff_eq!(theta[0], target[0], epsilon = 1e-3);
    assert_abs_diff_eq!(theta[1], target[1], epsilon = 1e-3);
}

fn pc_setup() -> (CloneTask, GateSequence, Vec<f64>) {
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let (seq, theta) = random_sequence(Arc::new(GatePool::phase_covariant()), 20, &mut substream(4, "t"));
    (task, seq, theta)
}

#[test]
fn training_is_deterministic_and_never_worse_than_the_start() {
    let (task, seq, theta) = pc_setup();
    let cfg = TrainConfig { epochs: 40, ..Default::default() };
    let a = train(&task, &seq, &theta, CostKind::Local, &cfg).unwrap();
    let b = train(&task, &seq, &theta, CostKind::Local, &cfg).unwrap();
    assert_eq!(a.theta, b.theta);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.trace.len(), 40);
    assert!(a.train_report.value <= a.trace.records[0].cost_train);
    assert!(a.test_report.is_some());
}

#[test]
fn frozen_positions_keep_their_angles() {
    let (task, seq, theta) = pc_setup();
    let params = seq.parameterized_positions();
    let frozen = vec![params[0], params[2]];
    let cfg = TrainConfig { epochs: 20, frozen: frozen.clone(), ..Default::default() };
    let out = train(&task, &seq, &theta, CostKind::Squared, &cfg).unwrap();
    for p in frozen {
        assert_eq!(out.theta[p], theta[p]);
    }
    let bad = TrainConfig { frozen: vec![seq.len()], ..Default::default() };
    assert!(train(&task, &seq, &theta, CostKind::Squared, &bad).is_err());
}

#[test]
fn early_stop_abandons_hopeless_runs() {
    let (task, seq, theta) = pc_setup();
    let cfg = TrainConfig { epochs: 100, patience: 10, reference_cost: Some(-1.0), ..Default::default() };
    let out = train(&task, &seq, &theta, CostKind::Local, &cfg).unwrap();
    assert!(out.stopped_early);
    assert_eq!(out.trace.len(), 10);
}

#[test]
fn shot_estimator_training_runs_and_stays_in_range() {
    let (task, seq, theta) = pc_setup();
    let cfg = TrainConfig { epochs: 10, estimator: EstimatorConfig::Shots { shots: 200 }, ..Default::default() };
    let out = train(&task, &seq, &theta, CostKind::Local, &cfg).unwrap();
    assert!(out.trace.records.iter().all(|r| (0.0..=1.0).contains(&r.cost_train)));
}

#[test]
fn mini_batches_are_supported() {
    let (task, seq, theta) = pc_setup();
    let cfg = TrainConfig { epochs: 10, batch_size: Some(5), ..Default::default() };
    assert!(train(&task, &seq, &theta, CostKind::Local, &cfg).is_ok());
    let cfg = TrainConfig { batch_size: Some(0), ..Default::default() };
    assert!(train(&task, &seq, &theta, CostKind::Local, &cfg).is_err());
}

#[test]
fn swap_test_on_identical_states_always_reports_one() {
    let psi = random_pure(2, &mut rng(1));
    let rho = DensityMatrix::from_pure(&psi);
    assert_eq!(swap_test_estimate(&psi, &rho, 500, 3).unwrap(), 1.0);
    assert!(swap_test_estimate(&psi, &rho, 0, 3).is_err());
    let other = random_density(1, &mut rng(2));
    assert!(swap_test_estimate(&psi, &other, 10, 3).is_err());
}

#[test]
fn swap_test_estimate_is_unbiased() {
    let mut r = rng(7);
    let psi = random_pure(1, &mut r);
    let rho = random_density(1, &mut r);
    let truth = rho.overlap(&psi);
    let est = swap_test_estimate(&psi, &rho, 200_000, 9).unwrap();
    // binomial standard error of the overlap estimate is below 0.003
    assert_abs_diff_eq!(est, truth, epsilon = 0.01);
}

#[test]
fn sample_plan_matches_hoeffding() {
    let plan = plan_samples(0.1, 0.05).unwrap();
    assert_eq!(plan.total_samples, 185);
    // ⌈ln(2/δ) / (2γ²)⌉ by hand: ln 40 / 0.02 = 184.44
    assert_eq!(plan.total_samples, ((40f64).ln() / 0.02).ceil() as usize);
    let fine = plan_samples(0.05, 0.05).unwrap();
    let ratio = fine.total_samples as f64 / plan.total_samples as f64;
    assert!((ratio - 4.0).abs() < 0.05, "halving γ scaled the plan by {ratio}");
    for (g, d) in [(0.0, 0.1), (0.1, 0.0), (0.1, 2.0), (1.0, 0.1), (f64::NAN, 0.1)] {
        assert!(plan_samples(g, d).is_err());
    }
}

#[test]
fn planned_shots_achieve_the_requested_coverage_near_the_cloning_optimum() {
    let plan = plan_samples(0.1, 0.05).unwrap();
    for overlap in [0.8535, 0.95, 1.0] {
        let cov = swap_test_coverage(overlap, &plan, 500, 11).unwrap();
        assert!(cov >= 1.0 - plan.delta, "coverage {cov} at overlap {overlap}");
    }
    assert!(swap_test_coverage(0.5, &plan, 0, 1).is_err());
}

#[test]
fn worst_case_overlap_needs_the_half_width_plan() {
    // The overlap estimate 1 − 2·(ones/shots) spans an interval of length 2,
    // so Hoeffding guarantees a γ-band only with the plan for γ/2. At overlap
    // ½ the outcome variance is largest and the γ plan falls short.
    let plan = plan_samples(0.1, 0.05).unwrap();
    let short = swap_test_coverage(0.5, &plan, 500, 11).unwrap();
    assert!(short < 1.0 - plan.delta, "coverage {short}");
    let wide = plan_samples(0.05, 0.05).unwrap();
    let widened = vqclone_core::train::SamplePlan { gamma: 0.1, ..wide };
    for overlap in [0.0, 0.5, 0.8535] {
        let cov = swap_test_coverage(overlap, &widened, 500, 12).unwrap();
        assert!(cov >= 1.0 - plan.delta, "coverage {cov} at overlap {overlap}");
    }
}

#[test]
fn one_gate_changes_about_half_the_time() {
    let mut r = substream(5, "d");
    let trials = 20_000;
    let mut counts = [0usize; 4];
    for _ in 0..trials {
        let d = draw_d(35, None, &mut r);
        assert!(d <= 35);
        if d < 4 {
            counts[d] += 1;
        }
    }
    let p1 = counts[1] as f64 / trials as f64;
    let p2 = counts[2] as f64 / trials as f64;
    assert_abs_diff_eq!(p1, 0.5, epsilon = 0.02);
    assert_abs_diff_eq!(p2, 0.25, epsilon = 0.02);
    // Pr(d = 0) = 2^-35: never seen in practice
    assert_eq!(counts[0], 0);
}

#[test]
fn explicit_zero_mass_is_respected() {
    let mut r = substream(6, "d");
    let trials = 20_000;
    let zeros = (0..trials).filter(|_| draw_d(10, Some(0.3), &mut r) == 0).count();
    assert_abs_diff_eq!(zeros as f64 / trials as f64, 0.3, epsilon = 0.02);
}

#[test]
fn perturbation_changes_at_most_d_positions() {
    let mut r = substream(8, "p");
    let (seq, theta) = random_sequence(Arc::new(GatePool::phase_covariant()), 30, &mut r);
    for _ in 0..50 {
        let (new_seq, new_theta, d) = perturb(&seq, &theta, None, &mut r);
        assert_eq!(new_seq.len(), seq.len());
        let changed =
            (0..seq.len()).filter(|&i| new_seq.indices()[i] != seq.indices()[i] || new_theta[i] != theta[i]).count();
        assert!(changed <= d);
    }
}

fn unitaries_agree_up_to_phase(a: &GateSequence, ta: &[f64], b: &GateSequence, tb: &[f64]) -> bool {
    let ua = build_unitary(a, ta, 3).unwrap();
    let ub = build_unitary(b, tb, 3).unwrap();
    // |tr(U_a† U_b)| = dim iff they differ by a global phase
    let dim = ua.dim();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..dim {
        for k in 0..dim {
            tr += ua.get(k, i).conj() * ub.get(k, i);
        }
    }
    (tr.norm() - dim as f64).abs() < 1e-9
}

#[test]
fn reduce_merges_rotations_and_cancels_cz_pairs() {
    let specs = [
        GateSpec::ry(0),
        GateSpec::rz(1),
        GateSpec::ry(0),
        GateSpec::cz(1, 2),
        GateSpec::cz(1, 2),
        GateSpec::rz(2),
        GateSpec::rz(2),
    ];
    let theta = [0.3, 0.4, 0.5, 0.0, 0.0, PI, PI];
    let seq = GateSequence::from_specs(&specs).unwrap();
    let (g, t) = reduce(&seq, &theta);
    // RY(0.3)·RY(0.5) merge; the CZ pair cancels; RZ(π)·RZ(π) = RZ(2π) drops
    assert_eq!(g.len(), 2);
    assert_abs_diff_eq!(t[0], 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(t[1], 0.4, epsilon = 1e-12);
}

#[test]
fn reduce_keeps_gates_separated_by_an_overlapping_gate() {
    let specs = [GateSpec::ry(0), GateSpec::cz(0, 1), GateSpec::ry(0)];
    let seq = GateSequence::from_specs(&specs).unwrap();
    let (g, _) = reduce(&seq, &[0.3, 0.0, 0.5]);
    assert_eq!(g.len(), 3);
}

#[test]
fn compression_preserves_length_and_cost() {
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let batch = Batch::new(&sample(&task.family, 10, 1).unwrap()).unwrap();
    let mut r = substream(9, "c");
    for _ in 0..20 {
        let (seq, theta) = random_sequence(Arc::new(GatePool::phase_covariant()), 35, &mut r);
        let (cseq, ctheta) = compress(&seq, &theta, &mut r);
        assert_eq!(cseq.len(), seq.len());
        let before = evaluate(CostKind::Local, &task, &seq, &theta, &batch).unwrap().value;
        let after = evaluate(CostKind::Local, &task, &cseq, &ctheta, &batch).unwrap().value;
        assert_abs_diff_eq!(before, after, epsilon = 1e-9);
        assert!(unitaries_agree_up_to_phase(&seq, &theta, &cseq, &ctheta));
    }
}

fn small_search(seed: u64) -> vqclone_core::SearchResult {
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let cfg = SearchConfig { seq_len: 20, iterations: 6, epochs_per_iter: 30, seed, ..Default::default() };
    search(&task, CostKind::Local, &cfg).unwrap()
}

#[test]
fn search_history_is_monotone_and_reproducible() {
    let a = small_search(3);
    let b = small_search(3);
    assert_eq!(a.cost_history, b.cost_history);
    assert_eq!(a.best_seq.indices(), b.best_seq.indices());
    assert_eq!(a.cost_history.len(), 6);
    assert!(a.cost_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*a.cost_history.last().unwrap(), a.best_cost);
    assert!(a.accepted >= 1);
}

#[test]
fn search_rejects_invalid_configs() {
    let task = CloneTask::standard(1, 2, 1, StateFamily::PhaseCovariant).unwrap();
    let bad = SearchConfig { pool: "FC5".into(), ..Default::default() };
    assert!(search(&task, CostKind::Local, &bad).is_err());
    let bad = SearchConfig { iterations: 0, ..Default::default() };
    assert!(search(&task, CostKind::Local, &bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn plan_is_monotone(g in 0.01f64..0.5, d in 0.01f64..0.5) {
        let p = plan_samples(g, d).unwrap();
        prop_assert!(plan_samples(g * 0.9, d).unwrap().total_samples >= p.total_samples);
        prop_assert!(plan_samples(g, d * 0.5).unwrap().total_samples >= p.total_samples);
        prop_assert!(p.total_samples as f64 >= (2.0 / d).ln() / (2.0 * g * g));
    }

    #[test]
    fn compression_never_changes_the_unitary(seed in any::<u64>()) {
        let mut r = substream(seed, "prop");
        let (seq, theta) = random_sequence(Arc::new(GatePool::phase_covariant()), 25, &mut r);
        let (cseq, ctheta) = compress(&seq, &theta, &mut r);
        prop_assert!(unitaries_agree_up_to_phase(&seq, &theta, &cseq, &ctheta));
    }
}
