mod common;

use std::f64::consts::FRAC_1_SQRT_2;

use decohere::measure::{
    degree_of_polarization, fidelity, reconstruct, reconstruct_from_probabilities, sample_counts, stokes,
    uhlmann_fidelity, visibility, CountRecord, MeasurementBasis,
};
use decohere::qmat::{c, trace_distance, Mat2, Rho2, C64};
use proptest::prelude::*;

fn pure(ket: [C64; 2]) -> Rho2 {
    Rho2::pure(ket).unwrap()
}

fn analytic_probabilities(rho: &Rho2) -> (f64, f64, f64) {
    (
        MeasurementBasis::horizontal().probability(rho),
        MeasurementBasis::diagonal().probability(rho),
        MeasurementBasis::right_circular().probability(rho),
    )
}

#[test]
fn stokes_of_reference_states() {
    let h = pure([c(1.0, 0.0), c(0.0, 0.0)]);
    let s = stokes(&h);
    assert_eq!((s.s1, s.s2, s.s3), (1.0, 0.0, 0.0));
    let r = pure([c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]);
    let s = stokes(&r);
    assert!(s.s1.abs() < 1e-15 && s.s2.abs() < 1e-15 && (s.s3 - 1.0).abs() < 1e-15);
    let s = stokes(&Rho2::maximally_mixed());
    assert_eq!((s.s1, s.s2, s.s3), (0.0, 0.0, 0.0));
}

#[test]
fn horizontal_light_has_no_diagonal_visibility() {
    let h = pure([c(1.0, 0.0), c(0.0, 0.0)]);
    assert!(visibility(&h, &MeasurementBasis::diagonal()) < 1e-15);
    assert!((visibility(&h, &MeasurementBasis::horizontal()) - 1.0).abs() < 1e-15);
}

#[test]
fn dephased_diagonal_state() {
    // ρ₁₂ = ½F with |F| = e^{-1}: both P and the 45° visibility equal |F|
    let f = (-1.0f64).exp();
    let rho = Rho2::validate(Mat2::from_real([[0.5, 0.5 * f], [0.5 * f, 0.5]])).unwrap();
    assert!((degree_of_polarization(&rho) - f).abs() < 1e-15);
    assert!((visibility(&rho, &MeasurementBasis::diagonal()) - f).abs() < 1e-15);
}

#[test]
fn counts_of_an_eigenstate() {
    let b = MeasurementBasis::linear(0.3);
    let rho = pure(b.ket());
    let rec = sample_counts(&rho, &b, 1000, 7).unwrap();
    assert_eq!(rec.counts, [1000, 0]);
    assert!((rec.visibility() - 1.0).abs() < 1e-15);
}

#[test]
fn counts_of_unpolarized_light_are_binomial() {
    let rec = sample_counts(&Rho2::maximally_mixed(), &MeasurementBasis::diagonal(), 1_000_000, 11).unwrap();
    let frac = rec.counts[0] as f64 / 1e6;
    // 3σ = 3·√(¼/10⁶) = 1.5e-3
    assert!((frac - 0.5).abs() < 0.002, "{frac}");
}

#[test]
fn counts_are_reproducible_and_serializable() {
    let rho = pure([c(0.6, 0.0), c(0.0, 0.8)]);
    let a = sample_counts(&rho, &MeasurementBasis::right_circular(), 5000, 42).unwrap();
    let b = sample_counts(&rho, &MeasurementBasis::right_circular(), 5000, 42).unwrap();
    assert_eq!(a, b);
    let text = format!("basis,outcome,count,seed\n{a}");
    assert_eq!(CountRecord::parse_all(&text).unwrap(), vec![a.clone()]);
    let (n_max, n_min) = (a.counts[0].max(a.counts[1]) as f64, a.counts[0].min(a.counts[1]) as f64);
    assert!((a.visibility() - (n_max - n_min) / (n_max + n_min)).abs() < 1e-15);
}

#[test]
fn reconstruction_needs_all_three_bases() {
    let rho = Rho2::maximally_mixed();
    let recs = vec![
        sample_counts(&rho, &MeasurementBasis::horizontal(), 10, 1).unwrap(),
        sample_counts(&rho, &MeasurementBasis::diagonal(), 10, 2).unwrap(),
    ];
    assert!(reconstruct(&recs).is_err());
}

#[test]
fn diagonal_pattern_reconstructs_diagonal() {
    let rho = reconstruct_from_probabilities(0.8, 0.5, 0.5).unwrap();
    assert!(rho.get(0, 1).norm() < 1e-15);
    assert!((rho.get(0, 0).re - 0.8).abs() < 1e-15);
}

/// Fraction of seeds for which a sampled reconstruction of `|45°⟩` lands
/// within trace distance `limit` of the truth.
fn sampled_success_rate(seeds: u64, shots: u64, limit: f64) -> f64 {
    let truth = pure([c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
    let bases = [MeasurementBasis::horizontal(), MeasurementBasis::diagonal(), MeasurementBasis::right_circular()];
    let ok = (0..seeds)
        .filter(|&seed| {
            let recs: Vec<_> =
                bases.iter().enumerate().map(|(i, b)| sample_counts(&truth, b, shots, 3 * seed + i as u64).unwrap()).collect();
            trace_distance(&reconstruct(&recs).unwrap(), &truth) < limit
        })
        .count();
    ok as f64 / seeds as f64
}

#[test]
fn sampled_reconstruction_is_close() {
    assert!(sampled_success_rate(100, 1_000_000, 5e-3) >= 0.95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bloch_radius_identity(rho in common::density::<2>()) {
        let p = degree_of_polarization(&rho);
        prop_assert!((p * p - (2.0 * rho.purity() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn linear_inversion_round_trips(rho in common::density::<2>()) {
        let (h, d, r) = analytic_probabilities(&rho);
        let back = reconstruct_from_probabilities(h, d, r).unwrap();
        prop_assert!(back.max_abs_diff(&rho) < 1e-12);
    }
}

proptest! {
    #[test]
    fn visibility_ignores_global_phase(rho in common::density::<2>(), raw in prop::collection::vec(-1.0f64..1.0, 4), phase in -7.0f64..7.0) {
        prop_assume!(raw.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let ket = common::ket_from::<2>(&raw);
        let shifted = ket.map(|z| z * C64::from_polar(1.0, phase));
        let a = visibility(&rho, &MeasurementBasis::new(ket).unwrap());
        let b = visibility(&rho, &MeasurementBasis::new(shifted).unwrap());
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn pure_fidelity_is_overlap(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4)) {
        prop_assume!(a.iter().map(|x| x * x).sum::<f64>() > 1e-2 && b.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let (ka, kb) = (common::ket_from::<2>(&a), common::ket_from::<2>(&b));
        let overlap = (ka[0].conj() * kb[0] + ka[1].conj() * kb[1]).norm_sqr();
        let (ra, rb) = (pure(ka), pure(kb));
        let fab = fidelity(&ra, &rb).unwrap();
        prop_assert!((fab - overlap).abs() < 1e-12);
        prop_assert!((fab - fidelity(&rb, &ra).unwrap()).abs() < 1e-12);
        prop_assert!((uhlmann_fidelity(&ra, &rb).unwrap() - overlap).abs() < 1e-6);
    }

    #[test]
    fn mixed_fidelity_is_bounded_and_symmetric(a in common::density::<4>(), b in common::density::<4>()) {
        let fab = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&fab));
        prop_assert!((fab - fidelity(&b, &a).unwrap()).abs() < 1e-8);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-8);
    }
}
