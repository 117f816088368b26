use std::f64::consts::PI;

use pfme_bath::{kappa, lattice_lines, line_weights, propagator_phi, truncation_mode, BathSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_mode_weights_normalised(d in 0.0f64..1.2, beta in 0.2f64..20.0, cutoff in 0.1f64..3.0) {
        let b = BathSpec::new(1.0 / PI, cutoff, beta).unwrap();
        let m = truncation_mode(&b, 8.0 * PI / 3.0 * d * d).unwrap();
        let l = line_weights(&m, beta, 1e-12).unwrap();
        prop_assert!((l.total() - 1.0).abs() < 1e-10);
        prop_assert!(l.weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn lattice_weights_normalised(d in 0.0f64..0.6, beta in 0.5f64..10.0) {
        let b = BathSpec::new(1.0 / PI, 1.0, beta).unwrap();
        let l = lattice_lines(&b, 8.0 * PI / 3.0 * d * d, 0.05, 1, 1e-12).unwrap();
        prop_assert!((l.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn propagator_is_hermitian(s in 0.0f64..200.0, d in 0.0f64..1.0, beta in 0.2f64..20.0) {
        let b = BathSpec::new(1.0 / PI, 1.0, beta).unwrap();
        let w = 8.0 * PI / 3.0 * d * d;
        let p = propagator_phi(s, &b, w).unwrap();
        let m = propagator_phi(-s, &b, w).unwrap();
        prop_assert!((p - m.conj()).norm() < 1e-10 * (1.0 + p.norm()));
        let p0 = propagator_phi(0.0, &b, w).unwrap();
        prop_assert!(p0.re >= 0.0 && p0.im == 0.0);
        prop_assert!((p - p0).exp().norm() <= 1.0 + 1e-13);
    }

    #[test]
    fn kappa_in_unit_interval(d in 0.0f64..2.0, beta in 0.1f64..50.0) {
        let b = BathSpec::new(1.0 / PI, 1.0, beta).unwrap();
        let k = kappa(&b, 8.0 * PI / 3.0 * d * d).unwrap();
        prop_assert!(k > 0.0 && k <= 1.0);
    }
}
