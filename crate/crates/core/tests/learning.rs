mod common;

use qacspec::boolfn::{disagreement_with, named_function, output_one_probabilities};
use qacspec::channel::{choi_of_boolfn, choi_of_circuit, choi_of_identity, choi_of_replacement, ChoiRep};
use qacspec::circuit::{random_qac, RandomQacSpec};
use qacspec::learning::rounding::project_trace_preserving;
use qacspec::learning::{
    estimate_exact, estimate_low_degree, learn_channel, round_to_cptp, DensityBackend, EstimatedSpectrum, LearnConfig,
    Oracle, OracleMode, RoundingOptions, DEFAULT_SHOT_CAP,
};
use qacspec::linalg::ComplexMatrix;
use qacspec::pauli::{pauli_matrix, PauliString};
use qacspec::random::{random_hermitian, seeded};
use qacspec::Error;

#[test]
fn identity_channel_low_degree_estimates() {
    let phi = choi_of_identity(1);
    let backend = DensityBackend::new(&phi).unwrap();
    let exact = estimate_exact(&phi, 2).unwrap();
    let mut good = 0;
    for seed in 0..40 {
        let est = estimate_low_degree(Oracle::Shadows(&backend), 2, 0.05, 0.05, seed, None, DEFAULT_SHOT_CAP).unwrap();
        assert_eq!(est.paulis.len(), 16);
        assert_eq!(est.eta, 0.05);
        let worst = est
            .estimates
            .iter()
            .zip(&exact.estimates)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        good += usize::from(worst <= 0.05);
    }
    assert!(good >= 38, "{good}/40 seeds within eta");
}

#[test]
fn parity_channel_top_coefficient() {
    let f = named_function("parity", 2).unwrap();
    let phi = choi_of_boolfn(&f);
    let backend = DensityBackend::new(&phi).unwrap();
    let est = estimate_low_degree(Oracle::Shadows(&backend), 3, 0.05, 0.05, 8, None, DEFAULT_SHOT_CAP).unwrap();
    let zzz: PauliString = "ZZZ".parse().unwrap();
    let i = est.paulis.iter().position(|p| *p == zzz).unwrap();
    let exact = estimate_exact(&phi, 3).unwrap();
    assert!((exact.estimates[i] - 0.5).abs() < 1e-12);
    assert!((est.estimates[i] - 0.5).abs() <= 0.05);
}

#[test]
fn exact_oracle_matches_and_queries_need_single_output() {
    let phi = choi_of_identity(2);
    let est = estimate_low_degree(Oracle::Exact(&phi), 2, 0.1, 0.1, 0, None, DEFAULT_SHOT_CAP).unwrap();
    let exact = estimate_exact(&phi, 2).unwrap();
    assert_eq!(est.estimates, exact.estimates);
    assert_eq!(est.shots_used, 0);
    let err = estimate_low_degree(Oracle::Queries(&phi), 2, 0.1, 0.1, 0, None, DEFAULT_SHOT_CAP).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)), "{err}");
    let err = estimate_low_degree(Oracle::Exact(&phi), 5, 0.1, 0.1, 0, None, DEFAULT_SHOT_CAP).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn truncated_reconstruction_error_is_tail_weight() {
    let phi = choi_of_identity(1);
    let est = estimate_exact(&phi, 1).unwrap();
    let err = est.reconstruct().unwrap().normalized_distance_sq(&phi).unwrap();
    assert!((err - 0.75).abs() < 1e-12);

    let zero = EstimatedSpectrum {
        estimates: vec![0.0; est.estimates.len()],
        ..est
    };
    let back = zero.reconstruct().unwrap();
    assert!(back.matrix().max_abs_diff(&ComplexMatrix::zeros(4)) == 0.0);
    let total = phi.spectrum().unwrap().total_weight();
    assert!((back.normalized_distance_sq(&phi).unwrap() - total).abs() < 1e-12);

    for seed in 0..5 {
        let c = random_qac(&RandomQacSpec::new(4, 2, vec![2, 3]), seed).unwrap();
        let phi = choi_of_circuit(&c).unwrap();
        for k in 0..=5 {
            let err = estimate_exact(&phi, k)
                .unwrap()
                .reconstruct()
                .unwrap()
                .normalized_distance_sq(&phi)
                .unwrap();
            assert!((err - phi.weight_above(k).unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn error_split_with_bounded_noise() {
    let mut rng = seeded(3);
    for seed in 0..5 {
        let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 40 + seed).unwrap();
        let phi = choi_of_circuit(&c).unwrap();
        let k = 2;
        let eta = 0.01;
        let mut est = estimate_exact(&phi, k).unwrap();
        for v in &mut est.estimates {
            *v += eta * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0);
        }
        let err = est.reconstruct().unwrap().normalized_distance_sq(&phi).unwrap();
        let bound = est.paulis.len() as f64 * eta * eta + phi.weight_above(k).unwrap();
        assert!(err <= bound + 1e-12, "{err} > {bound}");
    }
}

#[test]
fn learn_exact_identity_channel() {
    let phi = choi_of_identity(1);
    let r = learn_channel(&phi, None, &LearnConfig::new(2, 0.1, 0.1, 0).oracle(OracleMode::Exact)).unwrap();
    assert!(r.report.error_post <= 1e-9);
    assert_eq!(r.report.shots_used, 0);
}

#[test]
fn learn_with_queries_and_purification() {
    let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 12).unwrap();
    let phi = choi_of_circuit(&c).unwrap();
    let q = learn_channel(&phi, None, &LearnConfig::new(4, 0.1, 0.1, 1).oracle(OracleMode::Queries)).unwrap();
    assert!(q.report.error_post <= 0.1, "{:?}", q.report);
    let mut cfg = LearnConfig::new(4, 0.1, 0.1, 2);
    cfg.backend = qacspec::learning::ShadowBackend::Purification;
    let s = learn_channel(&phi, Some(&c), &cfg).unwrap();
    assert!(s.report.error_post <= 0.1, "{:?}", s.report);
}

#[test]
fn learned_parity_thresholds_to_close_function() {
    let f = named_function("parity", 3).unwrap();
    let phi = choi_of_boolfn(&f);
    let epsilon = 0.1;
    let r = learn_channel(&phi, None, &LearnConfig::new(4, epsilon, 0.1, 5)).unwrap();
    let p = output_one_probabilities(&r.phi_rounded).unwrap();
    assert!(disagreement_with(&p, &f) <= epsilon.sqrt());
}

#[test]
fn trace_only_perturbation_is_undone_by_tp_projection() {
    let phi = choi_of_replacement(1, &ComplexMatrix::identity(2).scale(0.5)).unwrap();
    let zi = pauli_matrix(&"ZI".parse().unwrap()).scale(0.01);
    let noisy = ChoiRep::new(1, 1, phi.matrix() + &zi).unwrap();
    let tp = project_trace_preserving(&noisy).unwrap();
    assert!(tp.matrix().max_abs_diff(phi.matrix()) < 1e-15);
    let r = round_to_cptp(&noisy, &RoundingOptions::default()).unwrap();
    let moved = common::frobenius(&(noisy.matrix() - r.choi.matrix()));
    assert!((moved - common::frobenius(&zi)).abs() < 1e-9);
}

#[test]
fn rounding_residuals_shrink_monotonically() {
    let opts = RoundingOptions {
        track_history: true,
        ..Default::default()
    };
    for seed in 0..20 {
        let c = random_qac(&RandomQacSpec::new(3, 2, vec![2, 3]), 60 + seed).unwrap();
        let phi = choi_of_circuit(&c).unwrap();
        let dim = phi.matrix().dim();
        let noise = random_hermitian(dim, &mut seeded(seed)).scale(0.1);
        let noisy = ChoiRep::new(phi.n_in(), phi.n_out(), phi.matrix() + &noise).unwrap();
        let r = round_to_cptp(&noisy, &opts).unwrap();
        assert!(r.converged);
        for w in r.history.windows(2) {
            assert!(w[1].psd_violation <= w[0].psd_violation + 1e-10, "seed {seed}: {:?}", w);
            assert!(w[1].tp_residual <= w[0].tp_residual + 1e-10, "seed {seed}: {:?}", w);
        }
    }
}
