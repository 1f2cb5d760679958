//! Invariants over randomly drawn parameters.

use nematic_core::harmonic::{self, StateKind, Tiling};
use nematic_core::ldg::{self, LdgParams};
use nematic_core::numerics::{BandLdlt, SymBand};
use nematic_core::of_strong::{self, ElasticParams};
use nematic_core::of_weak;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn critical_anisotropy_ordering(b in 0.02f64..0.98, n in 1u32..6) {
        let d = of_strong::delta_n(b, n);
        prop_assert!(d > 0.0 && d < 1.0);
        prop_assert!(of_strong::delta_n(b, n + 1) > d);
        prop_assert!(of_strong::delta_n((b + 0.01).min(0.99), n) >= d);
    }

    #[test]
    fn weak_anchoring_lowers_threshold(b in 0.1f64..0.9, alpha in 0.05f64..20.0) {
        let weak = of_weak::delta_weak(alpha, b, 0).unwrap();
        prop_assert!(weak > 0.0 && weak < of_strong::delta_n(b, 1));
        let stronger = of_weak::delta_weak(alpha * 1.5, b, 0).unwrap();
        prop_assert!(stronger > weak);
    }

    #[test]
    fn u1_and_u2_differ_by_twice_log(b in 0.05f64..0.95, n in 1u32..40) {
        let u1 = harmonic::normalized_energy(StateKind::U1, n, b).unwrap();
        let u2 = harmonic::normalized_energy(StateKind::U2, n, b).unwrap();
        prop_assert!(((u1 - u2) - 2.0 * (1.0 / b).ln()).abs() < 1e-10 * (1.0 + u1.abs()));
    }

    #[test]
    fn core_energy_adds_log(b in 0.2f64..0.9, n in 1u32..12, eps_frac in 0.01f64..0.9, k in 0.1f64..5.0) {
        let eps = eps_frac * b / 4.0;
        for kind in StateKind::ALL {
            let e = harmonic::total_energy(kind, n, b, eps, k).unwrap();
            let norm = harmonic::normalized_energy(kind, n, b).unwrap();
            prop_assert!((e / (k * std::f64::consts::PI) - (1.0 / eps).ln() - norm).abs() < 1e-10 * e.abs().max(1.0));
        }
    }

    #[test]
    fn tiling_rejects_only_odd_u3_and_d(n in 1u32..20) {
        for kind in StateKind::ALL {
            let full = harmonic::state_coefficients(kind, n, Tiling::FullAnnulus);
            let expect_err = n % 2 == 1 && matches!(kind, StateKind::U3 | StateKind::D);
            prop_assert_eq!(full.is_err(), expect_err);
        }
    }

    #[test]
    fn spiral_beats_radial(b in 0.1f64..0.8, excess in 0.01f64..1.0) {
        let d1 = of_strong::delta_n(b, 1);
        let delta = d1 + excess * (1.0 - d1);
        let spiral = of_strong::spiral_solve_with_nodes(delta, b, 201).unwrap();
        let elastic = ElasticParams::new(delta, 1.0).unwrap();
        let e = of_strong::spiral_energy(&spiral, &elastic).unwrap();
        let radial = of_strong::defect_free_energy(&of_strong::AnnulusGeometry::new(b).unwrap(), &elastic);
        prop_assert!(spiral.u0 > 0.0 && spiral.u0 < std::f64::consts::FRAC_PI_2);
        prop_assert!(e < radial);
    }

    #[test]
    fn band_factorization_solves(values in proptest::collection::vec(-1.0f64..1.0, 30), rhs in proptest::collection::vec(-1.0f64..1.0, 10)) {
        // Diagonally dominant, hence positive definite.
        let mut a = SymBand::zeros(10, 2);
        for i in 0..10 {
            a.set(i, i, 5.0 + values[i].abs());
            if i + 1 < 10 { a.set(i + 1, i, values[10 + i]); }
            if i + 2 < 10 { a.set(i + 2, i, values[20 + i]); }
        }
        let f: BandLdlt = a.ldlt();
        prop_assert!(f.is_positive_definite());
        let x = f.solve(&rhs);
        let ax = a.mul_vec(&x);
        for (l, r) in ax.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn order_profiles_are_bounded(b in 0.2f64..0.9, t in 0.0f64..200.0) {
        let params = LdgParams::new(t).unwrap();
        let s = ldg::solve_s(b, params, 201).unwrap();
        let u = ldg::solve_u(b, params, 201).unwrap();
        let floor = 2f64.sqrt() * b / (b * b + 1.0);
        for (sv, uv) in s.values.iter().zip(&u.values) {
            prop_assert!(*sv >= floor - 1e-10 && *sv <= std::f64::consts::FRAC_1_SQRT_2 + 1e-10);
            prop_assert!(*uv >= -1e-10 && *uv <= sv + 1e-10);
        }
    }
}
