mod common;

use enantio::estimation::{eta_from_top_closed, eta_from_transmission_full, sensitivity, EstimationError};
use enantio::steady::{optimal_transmission, transmission};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_round_trip(p in common::monotone_params(), eta in -1.0f64..=1.0) {
        let t = optimal_transmission(&p.with_eta(eta)).unwrap();
        let est = eta_from_top_closed(t, &p).unwrap();
        prop_assert!((est.eta_hat - eta).abs() <= 1e-9, "{} vs {eta}", est.eta_hat);
        prop_assert!(est.in_range);
    }

    #[test]
    fn full_model_round_trip(p in common::strong_monotone_params(), eta in -1.0f64..=1.0) {
        let t = transmission(&p.with_eta(eta)).unwrap();
        match eta_from_transmission_full(t, &p, (-1.0, 1.0)) {
            Ok(est) => prop_assert!((est.eta_hat - eta).abs() <= 1e-9, "{} vs {eta}", est.eta_hat),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn relabeling_negates_the_estimate(p in common::monotone_params(), eta in -1.0f64..=1.0) {
        let p = p.with_phi(0.0);
        let t = optimal_transmission(&p.with_eta(eta)).unwrap();
        let mirrored = optimal_transmission(&p.with_phi(PI).with_eta(-eta)).unwrap();
        prop_assert!((t - mirrored).abs() <= 1e-12 * t.max(1e-300));
        let left = eta_from_top_closed(t, &p).unwrap().eta_hat;
        let right = eta_from_top_closed(t, &p.with_phi(PI)).unwrap().eta_hat;
        prop_assert!((left + right).abs() <= 1e-9);
    }

    #[test]
    fn sensitivity_matches_central_differences(p in common::params(), eta in -0.99f64..0.99) {
        prop_assume!(p.drive_amp > 0.0);
        let s = sensitivity(&p, eta).unwrap();
        prop_assume!(s.abs() > 1e-8);
        let h = 1e-6;
        let fd = (transmission(&p.with_eta(eta + h)).unwrap() - transmission(&p.with_eta(eta - h)).unwrap()) / (2.0 * h);
        // the difference quotient itself carries rounding of order ε·T/h
        let noise = 1e-16 * transmission(&p.with_eta(eta)).unwrap() / h;
        prop_assert!((s - fd).abs() <= 1e-6 * s.abs() + 10.0 * noise, "{s} vs {fd}");
    }

    #[test]
    fn measurements_above_the_maximum_are_rejected(p in common::monotone_params()) {
        let t_max = optimal_transmission(&p.with_eta(1.0)).unwrap().max(optimal_transmission(&p.with_eta(-1.0)).unwrap());
        let above = eta_from_top_closed(1.01 * t_max + 1e-12, &p);
        prop_assert!(matches!(above, Err(EstimationError::AboveMaximum { .. })), "{above:?}");
    }
}
