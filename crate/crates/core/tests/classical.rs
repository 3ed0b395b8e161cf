use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use escape_smoothing::classical::{
    classical_constant, classical_constants, determinant, escape_weight_integral, escape_weight_integrals,
    flow_jacobian, flow_map, integrate_flow, integrate_flow_with, occupation_time, step_verlet, FlowConfig,
    SearchConfig,
};
use escape_smoothing::{Point, Potential};
use proptest::prelude::*;

fn point(x: f64, xi: f64) -> Point {
    Point::new(vec![x], vec![xi]).unwrap()
}

/// `√(R²+E) ∫₀^{2π} (1 + A² cos²t / R²)^{−1} dt` with `A² = 2E`, in closed form.
fn harmonic_weight_oracle(energy: f64, r: f64) -> f64 {
    (r * r + energy).sqrt() * 2.0 * PI / (1.0 + 2.0 * energy / (r * r)).sqrt()
}

fn small_search(seed: u64) -> SearchConfig<f64> {
    SearchConfig {
        e_max: 50.0,
        shells: 8,
        samples_per_shell: 16,
        top_k: 3,
        refine_iterations: 80,
        seed,
        ..Default::default()
    }
}

#[test]
fn verlet_steps_follow_rotation() {
    let h = 1e-3;
    let m = Potential::harmonic(1).unwrap();
    let a = step_verlet(&point(1.0, 0.0), h, &m).unwrap();
    assert_abs_diff_eq!(a.x[0], h.cos(), epsilon = 1e-9);
    assert_abs_diff_eq!(a.xi[0], -h.sin(), epsilon = 1e-9);
    let b = step_verlet(&point(0.0, 1.0), h, &m).unwrap();
    assert_abs_diff_eq!(b.x[0], h.sin(), epsilon = 1e-9);
    assert_abs_diff_eq!(b.xi[0], h.cos(), epsilon = 1e-9);
    assert_eq!(step_verlet(&point(0.0, 0.0), h, &m).unwrap(), point(0.0, 0.0));
    assert!(step_verlet(&point(0.0, 0.0), 0.0, &m).is_err());
}

#[test]
fn bracket_power_orbit_keeps_energy() {
    let m = Potential::bracket_power(1, 0.5).unwrap();
    let traj = integrate_flow(&m, &point(10.0, 0.0), 1.0, 1e-3).unwrap();
    assert_eq!(traj.len(), 1001);
    assert!(traj.max_drift() < 1e-6);
}

#[test]
fn weight_integral_matches_closed_form() {
    let m = Potential::harmonic(1).unwrap();
    for (x, xi) in [(0.0, 0.0), (1.0, 0.5), (-3.0, 2.0), (0.0, 7.0)] {
        let rho = point(x, xi);
        let e = 0.5 * (x * x + xi * xi);
        let traj = integrate_flow(&m, &rho, 2.0 * PI, 1e-3).unwrap();
        for r in [1.0, 2.5, 8.0] {
            let oracle = harmonic_weight_oracle(e, r);
            let got = escape_weight_integral(&traj, 1.0, r).unwrap();
            assert!((got - oracle).abs() <= 1e-6 * oracle, "E={e} R={r}: {got} vs {oracle}");
        }
        let streamed = escape_weight_integrals(&m, &rho, 2.0 * PI, 1.0, &[1.0, 2.5], FlowConfig::default()).unwrap();
        assert_abs_diff_eq!(streamed[1], escape_weight_integral(&traj, 1.0, 2.5).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn occupation_time_matches_arcsine_law() {
    let m = Potential::harmonic(1).unwrap();
    for e in [10.0f64, 1e3] {
        let a = (2.0 * e).sqrt();
        let traj = integrate_flow(&m, &point(a, 0.0), 2.0 * PI, 1e-4).unwrap();
        let oracle = 4.0 * (1.0 / a).asin();
        assert!((occupation_time(&traj, 1.0) - oracle).abs() < 5e-4);
    }
}

#[test]
fn invalid_weight_parameters() {
    let m = Potential::harmonic(1).unwrap();
    let traj = integrate_flow(&m, &point(1.0, 0.0), 1.0, 1e-3).unwrap();
    assert!(escape_weight_integral(&traj, 0.5, 1.0).is_err());
    assert!(escape_weight_integral(&traj, 1.0, 0.5).is_err());
}

#[test]
fn constant_dominates_samples_and_grows_with_r() {
    let m = Potential::bracket_power(1, 0.5).unwrap();
    let mut search = small_search(3);
    search.record_samples = true;
    let rs = [1.0, 1.5, 3.0, 6.0];
    let est = classical_constants(&m, 2.0 * PI, 1.0, &rs, &search).unwrap();
    for e in &est {
        assert!(e.samples.iter().all(|s| s.integral <= e.value * (1.0 + 1e-12)));
        assert_eq!(e.samples.len(), e.samples_used);
    }
    assert!(est.windows(2).all(|w| w[0].value <= w[1].value));
}

#[test]
fn same_seed_same_constant() {
    let m = Potential::anharmonic(1, 0.1, 1.0).unwrap();
    let a = classical_constant(&m, PI, 0.8, 2.0, &small_search(11)).unwrap();
    let b = classical_constant(&m, PI, 0.8, 2.0, &small_search(11)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.argmax, b.argmax);
}

#[test]
fn harmonic_constant_is_attained_at_rest() {
    let m = Potential::harmonic(1).unwrap();
    let est = classical_constant(&m, 2.0 * PI, 1.0, 3.0, &small_search(0)).unwrap();
    assert!((est.value - 6.0 * PI).abs() < 1e-9 * est.value);
    assert!(est.argmax_energy < 1e-8);
    assert!(!est.cutoff_saturated);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_is_symplectic(x in -3.0f64..3.0, xi in -3.0f64..3.0, t in 0.1f64..2.0, which in 0usize..3) {
        let models = [
            Potential::harmonic(1).unwrap(),
            Potential::bracket_power(1, 0.5).unwrap(),
            Potential::anharmonic(1, 0.2, 1.0).unwrap(),
        ];
        let j = flow_jacobian(&models[which], &point(x, xi), t, 1e-5, FlowConfig::default()).unwrap();
        prop_assert!((determinant(&j) - 1.0).abs() < 1e-6, "det {}", determinant(&j));
    }

    #[test]
    fn flow_is_reversible(x in -5.0f64..5.0, xi in -5.0f64..5.0, t in 0.01f64..3.0) {
        let m = Potential::bracket_power(1, 0.7).unwrap();
        let flow = FlowConfig::default();
        let there = flow_map(&m, &point(x, xi), t, flow).unwrap();
        let back = flow_map(&m, &there, -t, flow).unwrap();
        prop_assert!((back.x[0] - x).abs() < 1e-9 && (back.xi[0] - xi).abs() < 1e-9);
    }

    #[test]
    fn energy_drift_stays_in_envelope(
        c in prop::collection::vec(-6.0f64..6.0, 4),
        which in 0usize..3,
    ) {
        let models = [
            Potential::harmonic(2).unwrap(),
            Potential::bracket_power(2, 0.5).unwrap(),
            Potential::anharmonic(2, 0.1, 1.0).unwrap(),
        ];
        let rho = Point::from_coords(&c).unwrap();
        let traj = integrate_flow_with(&models[which], &rho, 2.0, FlowConfig::default()).unwrap();
        prop_assert!(traj.max_drift() <= 1e-6);
        prop_assert_eq!(traj.len(), 2001);
    }
}
