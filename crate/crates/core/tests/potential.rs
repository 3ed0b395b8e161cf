use approx::assert_relative_eq;
use escape_smoothing::potential::{check_assumption, SampleBox};
use escape_smoothing::{Error, PhasePoint, Potential, PotentialKind};
use proptest::prelude::*;

fn families(d: usize) -> Vec<Potential> {
    vec![
        Potential::harmonic(d).unwrap(),
        Potential::bracket_power(d, 0.5).unwrap(),
        Potential::bracket_power(d, 0.8).unwrap(),
        Potential::anharmonic(d, 0.1, 1.3).unwrap(),
    ]
}

#[test]
fn documented_values() {
    let h = Potential::harmonic(1).unwrap();
    assert_eq!(h.eval_potential(&[0.0]).unwrap(), 0.0);
    assert_eq!(h.eval_potential(&[2.0]).unwrap(), 2.0);
    assert_eq!(h.eval_gradient(&[2.0]).unwrap(), vec![2.0]);
    let b = Potential::bracket_power(1, 0.5).unwrap();
    assert_relative_eq!(b.eval_potential(&[3.0]).unwrap(), 2.16227766016838, max_relative = 1e-14);
    assert_relative_eq!(b.eval_gradient(&[3.0]).unwrap()[0], 0.9486832980505138, max_relative = 1e-14);
    let rho = PhasePoint::new(vec![0.0], vec![0.0]).unwrap();
    assert_eq!(h.eval_symbol(&rho).unwrap(), 0.0);
}

#[test]
fn gradient_vanishes_at_origin_for_all_families() {
    for d in [1, 2] {
        for m in families(d) {
            assert!(m.eval_gradient(&vec![0.0; d]).unwrap().iter().all(|g| g.abs() < 1e-15), "{:?}", m.kind());
        }
    }
}

#[test]
fn invalid_parameters_are_configuration_errors() {
    for m in [0.0, -0.5, 1.2, f64::NAN] {
        assert!(matches!(Potential::new(PotentialKind::BracketPower, m, vec![], 1), Err(Error::Config(_))));
    }
    assert!(Potential::new(PotentialKind::Harmonic, 0.5, vec![], 1).is_err());
    assert!(Potential::harmonic(0).is_err());
    let h = Potential::harmonic(2).unwrap();
    assert!(h.eval_potential(&[1.0]).is_err());
    assert!(h.eval_potential(&[f64::NAN, 0.0]).is_err());
}

#[test]
fn phase_points_must_be_finite() {
    assert!(PhasePoint::new(vec![f64::INFINITY], vec![0.0]).is_err());
    assert!(PhasePoint::new(vec![0.0], vec![0.0, 1.0]).is_err());
}

#[test]
fn audit_of_harmonic_in_two_dimensions() {
    let h = Potential::harmonic(2).unwrap();
    let rep = check_assumption(&h, SampleBox { half_width: 20.0, points_per_axis: 41 }, 4).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.orders.len(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences(
        x in prop::collection::vec(-30.0f64..30.0, 2),
        which in 0usize..4,
    ) {
        let m = &families(2)[which];
        let g = m.eval_gradient(&x).unwrap();
        for i in 0..2 {
            let h = 1e-4 * (1.0 + x[i].abs());
            let mut p = x.clone();
            let mut q = x.clone();
            p[i] += h;
            q[i] -= h;
            let fd = (m.eval_potential(&p).unwrap() - m.eval_potential(&q).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "fd {} vs {}", fd, g[i]);
        }
    }

    #[test]
    fn potential_and_symbol_are_non_negative(
        x in prop::collection::vec(-1e3f64..1e3, 2),
        xi in prop::collection::vec(-1e3f64..1e3, 2),
        which in 0usize..4,
    ) {
        let m = &families(2)[which];
        prop_assert!(m.eval_potential(&x).unwrap() >= 0.0);
        let rho = PhasePoint::new(x, xi).unwrap();
        prop_assert!(m.eval_symbol(&rho).unwrap() >= 0.0);
    }

    #[test]
    fn bracket_power_grows_like_declared_order(r in 1.0f64..1e4, m in 0.1f64..1.0) {
        let v = Potential::bracket_power(1, m).unwrap().eval_potential(&[r]).unwrap();
        let bracket = (1.0 + r * r).powf(m);
        prop_assert!((v - (bracket - 1.0)).abs() <= 1e-12 * bracket);
    }
}
