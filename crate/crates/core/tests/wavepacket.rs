use std::f64::consts::PI;

use escape_smoothing::classical::FlowConfig;
use escape_smoothing::quantum::{
    build_hamiltonian, eigendecompose, gram_constant, ConstantMethod, SmoothingParams, SmoothingProblem,
};
use escape_smoothing::wavepacket::{coherent_state, gaussian_symbol_average, probe_lower_bound};
use escape_smoothing::weyl::{build_grid, SymbolGrid};
use escape_smoothing::{Error, Point, Potential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point(x: f64, xi: f64) -> Point {
    Point::new(vec![x], vec![xi]).unwrap()
}

#[test]
fn overlaps_follow_gaussian_formula() {
    let g = build_grid(1, 256, 16.0).unwrap();
    let origin = coherent_state(&point(0.0, 0.0), &g).unwrap();
    for (x0, xi0) in [(1.0, 0.0), (2.5, 0.0), (-1.2, 0.8), (0.0, -3.0)] {
        let u = coherent_state(&point(x0, xi0), &g).unwrap();
        let oracle = (-(x0 * x0 + xi0 * xi0) / 4.0f64).exp();
        assert!((origin.overlap(&u).norm() - oracle).abs() < 1e-8, "({x0},{xi0})");
    }
}

#[test]
fn coordinate_moments() {
    let g = build_grid(1, 128, 12.0).unwrap();
    let x = SymbolGrid::from_fn(g, "x", |x, _| x[0]).unwrap();
    let avg = gaussian_symbol_average(&x, &point(1.5, -2.0)).unwrap();
    assert!((avg.quadrature - 1.5).abs() < 1e-10 && (avg.quadratic_form - 1.5).abs() < 1e-10);
    let x2 = SymbolGrid::from_fn(g, "x²", |x, _| x[0] * x[0]).unwrap();
    let avg = gaussian_symbol_average(&x2, &point(0.0, 0.0)).unwrap();
    assert!((avg.quadrature - 0.5).abs() < 1e-10 && (avg.quadratic_form - 0.5).abs() < 1e-10);
}

#[test]
fn both_average_paths_agree_on_random_bumps() {
    let g = build_grid(1, 128, 12.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let (cx, cp): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (wx, wp): (f64, f64) = (rng.random_range(0.8..2.5), rng.random_range(0.8..2.5));
        let (amp, tilt): (f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(-0.5..0.5));
        let sym = SymbolGrid::from_fn(g, "bump", |x, xi| {
            amp * (1.0 + tilt * (x[0] - cx)) * (-((x[0] - cx) / wx).powi(2) - ((xi[0] - cp) / wp).powi(2)).exp()
        })
        .unwrap();
        let center = point(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let avg = gaussian_symbol_average(&sym, &center).unwrap();
        let scale = avg.quadrature.abs().max(1e-3);
        assert!(
            (avg.quadrature - avg.quadratic_form).abs() <= 1e-6 * scale,
            "case {case}: {} vs {}",
            avg.quadrature,
            avg.quadratic_form
        );
    }
}

#[test]
fn probe_at_rest_and_sup_property() {
    let m = Potential::harmonic(1).unwrap();
    let g = build_grid(1, 128, 12.0).unwrap();
    let spec = eigendecompose(&build_hamiltonian(&m, &g).unwrap()).unwrap();
    let rs = [1.0, 2.0];
    let flow = FlowConfig::default();
    for center in [point(0.0, 0.0), point(1.0, 1.0)] {
        let reports = probe_lower_bound(&m, &spec, &center, 2.0 * PI, 1.0, &rs, 64, flow).unwrap();
        assert_eq!(reports.len(), 2);
        for rep in &reports {
            if center.x[0] == 0.0 {
                assert!((rep.a - 2.0 * PI * rep.r).abs() < 1e-9);
            }
            let problem =
                SmoothingProblem::new(&m, &spec, SmoothingParams { horizon: 2.0 * PI, nu: 1.0, r: rep.r, nq: 64 })
                    .unwrap();
            let q0 = gram_constant(&problem.gram(), &spec, ConstantMethod::DenseEig, 0).unwrap().value;
            assert!(rep.s <= q0 + 1e-9, "S {} above Q0 {q0}", rep.s);
            assert!(rep.s > 0.0 && rep.a_bar > 0.0);
        }
    }
}

#[test]
fn probe_rejected_when_orbit_leaves_band() {
    let m = Potential::harmonic(1).unwrap();
    let g = build_grid(1, 128, 12.0).unwrap();
    let spec = eigendecompose(&build_hamiltonian(&m, &g).unwrap()).unwrap();
    // The center clears the margin but its orbit reaches |ξ| = 6.9 > 0.7Ξ − 5.
    let res = probe_lower_bound(&m, &spec, &point(6.9, 0.0), 2.0 * PI, 1.0, &[1.0], 64, FlowConfig::default());
    assert!(matches!(res, Err(Error::Rejected(_))));
}
