mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::simpson;
use decohere::qmat::C64;
use decohere::spectra::{Gaussian, Spectrum, Tabulated, SPEED_OF_LIGHT};
use proptest::prelude::*;

fn laser() -> Gaussian {
    Gaussian::from_bandwidth(670e-9, 10e-9, 0.0).unwrap()
}

/// Independent oracle: Simpson integration of the unnormalized line shape
/// `exp(−4x²/δω²)` against `e^{ixτ}`, normalized numerically, carrier restored.
fn oracle_coherence(g: &Gaussian, tau: f64) -> C64 {
    let dw = g.delta_omega();
    let shape = |x: f64| (-4.0 * x * x / (dw * dw)).exp();
    let (a, b, n) = (-10.0 * dw, 10.0 * dw, 40_000);
    let norm = simpson(a, b, n, shape);
    let re = simpson(a, b, n, |x| shape(x) * (x * tau).cos()) / norm;
    let im = simpson(a, b, n, |x| shape(x) * (x * tau).sin()) / norm;
    C64::new(re, im) * C64::from_polar(1.0, g.omega0() * tau)
}

#[test]
fn bandwidth_conversion_for_the_diode_laser() {
    let g = laser();
    let c = SPEED_OF_LIGHT;
    assert_relative_eq!(g.omega0(), 2.0 * PI * c / 670e-9, max_relative = 1e-15);
    assert_relative_eq!(g.delta_omega(), 2.0 * PI * c * 10e-9 / (670e-9 * 670e-9), max_relative = 1e-15);
    // the quoted figures are rounded to about 1e-3
    assert_relative_eq!(g.omega0(), 2.8127e15, max_relative = 1e-3);
    assert_relative_eq!(g.delta_omega(), 4.198e13, max_relative = 1e-3);
}

#[test]
fn peak_density_matches_numerical_normalization() {
    let g = laser();
    let dw = g.delta_omega();
    let area = simpson(-10.0 * dw, 10.0 * dw, 20_000, |x| (-4.0 * x * x / (dw * dw)).exp());
    assert_relative_eq!(g.peak_density(), 1.0 / area, max_relative = 1e-10);
    assert_relative_eq!(g.density_at(g.omega0()), 1.0 / area, max_relative = 1e-10);
    assert!(g.density_at(g.omega0() + 10.0 * dw) < 1e-17 * g.peak_density());
}

#[test]
fn closed_form_matches_simpson_oracle() {
    let g = laser();
    for x in [0.0, 0.5, 1.0, 2.0, 4.0, 7.5, 12.0] {
        let tau = x / g.delta_omega();
        let diff = (g.coherence(tau) - oracle_coherence(&g, tau)).norm();
        assert!(diff < 1e-9, "δω·τ = {x}: {diff:e}");
    }
}

#[test]
fn magnitude_is_one_over_e_at_four() {
    let g = laser();
    let tau = 4.0 / g.delta_omega();
    assert_relative_eq!(oracle_coherence(&g, tau).norm(), (-1.0f64).exp(), max_relative = 1e-9);
    assert_relative_eq!(g.coherence(tau).norm(), (-1.0f64).exp(), max_relative = 1e-12);
}

#[test]
fn coherence_length_bracket() {
    let g = laser();
    let f = g.coherence(45e-6 / SPEED_OF_LIGHT).norm();
    assert!(f > 0.01 && f < 0.45, "{f}");
    let q = Spectrum::from(g).coherence_quadrature(45e-6 / SPEED_OF_LIGHT, 2001).norm();
    assert!((q - f).abs() < 1e-8);
}

#[test]
fn monochromatic_limit_never_decays() {
    let g = Gaussian::from_bandwidth(670e-9, 10e-9, 1.0).unwrap();
    for tau in [0.0, 1e-14, 1e-12, 1e-9] {
        assert_relative_eq!(g.coherence(tau).norm(), 1.0, epsilon = 1e-12);
    }
    let p = Gaussian::from_bandwidth(670e-9, 10e-9, 0.15).unwrap();
    assert_relative_eq!(p.coherence(1e-10).norm(), 0.15, epsilon = 1e-12);
}

#[test]
fn uniform_table_density_and_coherence() {
    let (lo, w) = (2.0e15, 4.0e13);
    let t = Tabulated::new(vec![(lo, 1.0), (lo + w, 1.0)]).unwrap();
    assert_relative_eq!(t.density_at(lo + 0.3 * w), 1.0 / w, max_relative = 1e-12);
    assert_eq!(t.density_at(lo - 1.0), 0.0);
    // sinc oracle for a flat band
    let s = Spectrum::from(t);
    let tau = 2.0 / w;
    let expected = C64::from_polar(1.0, (lo + 0.5 * w) * tau) * ((0.5 * w * tau).sin() / (0.5 * w * tau));
    assert!((s.coherence(tau) - expected).norm() < 1e-8);
}

#[test]
fn table_file_round_trip() {
    let text = "# omega density\n1.0e15, 0.0\n1.1e15 2.0\n1.2e15,0.0\n";
    let t = Tabulated::parse(text).unwrap();
    assert_relative_eq!(t.integral(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(t.centroid(), 1.1e15, max_relative = 1e-12);
    assert!(Tabulated::parse("1.0e15 -1\n2e15 1\n").is_err());
}

proptest! {
    #[test]
    fn coherence_is_hermitian_in_tau(x in -40.0f64..40.0, p in 0.0f64..1.0) {
        let g = Gaussian::from_bandwidth(670e-9, 10e-9, p).unwrap();
        let tau = x / g.delta_omega();
        prop_assert!((g.coherence(-tau) - g.coherence(tau).conj()).norm() < 1e-12);
        let s = Spectrum::from(g);
        let q = s.coherence_quadrature(-tau, 2001) - s.coherence_quadrature(tau, 2001).conj();
        prop_assert!(q.norm() < 1e-12);
    }

    #[test]
    fn gaussian_magnitude_decays_monotonically(a in 0.0f64..40.0, b in 0.0f64..40.0) {
        let g = laser();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let f = |x: f64| g.coherence(x / g.delta_omega()).norm();
        prop_assert!(f(hi) <= f(lo) + 1e-15);
        prop_assert!(f(-hi) <= f(-lo) + 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature(x in 0.0f64..20.0, p in 0.0f64..1.0) {
        let g = Gaussian::from_bandwidth(670e-9, 10e-9, p).unwrap();
        let tau = x / g.delta_omega();
        let s = Spectrum::from(g);
        prop_assert!((s.coherence(tau) - s.coherence_quadrature(tau, 2001)).norm() < 1e-8);
    }

    #[test]
    fn tabulation_preserves_normalization(n in 200usize..3000, width in 6.0f64..12.0) {
        let g = laser();
        let s = Spectrum::from(g);
        let t = s.tabulate(g.omega0() - width * g.delta_omega(), g.omega0() + width * g.delta_omega(), n).unwrap();
        prop_assert!((t.integral() - 1.0).abs() < 1e-8);
        // resampling rescales the density by a factor within 1e-8 of one
        for (w, f) in t.nodes().filter(|&(w, _)| (w - g.omega0()).abs() < 2.0 * g.delta_omega()) {
            prop_assert!((f / g.density_at(w) - 1.0).abs() < 1e-8);
        }
        prop_assert!((t.centroid() - g.omega0()).abs() < 1e-8 * g.omega0());
    }
}
