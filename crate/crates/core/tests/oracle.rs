//! Closed-form pair diagonalization against the Fock-space oracle.

use bose2d::bogoliubov::{diagonalize, QuadraticModel};
use bose2d::fock::{build, compare_analytic, lowest_eigs};
use bose2d::lanczos::{EigenMethod, LanczosOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn shift_and_frequency_match_exact_diagonalization(f in 0.2f64..20.0, ratio in -0.8f64..0.8) {
        let model = QuadraticModel::from_fg(&[(f, ratio * f)]).unwrap();
        let c = compare_analytic(&model, 40, 3, EigenMethod::Auto).unwrap();
        // truncation error ~ α^{n_max}, α ≤ 0.5 here
        let tol = 1e-8 * f;
        prop_assert!(c.deviations.iter().all(|d| d.abs() <= tol), "{:?}", c.deviations);
        prop_assert!(c.eigs[0] >= c.shift - 1e-12 * f);
    }

    #[test]
    fn random_two_pair_models_agree_dense_vs_lanczos(f1 in 0.5f64..4.0, r1 in -0.7f64..0.7, f2 in 0.5f64..4.0, r2 in -0.7f64..0.7) {
        let model = QuadraticModel::from_fg(&[(f1, r1 * f1), (f2, r2 * f2)]).unwrap();
        let (_, h) = build(&model, 6).unwrap();
        let opts = LanczosOptions::default();
        let d = lowest_eigs(&h, 4, EigenMethod::Dense, &opts).unwrap();
        let l = lowest_eigs(&h, 4, EigenMethod::Lanczos, &opts).unwrap();
        for (a, b) in d.values.iter().zip(&l.values) {
            prop_assert!((a - b).abs() <= 1e-8 * f1.max(f2));
        }
        // truncation only removes states, so the ground energy lies above the shift
        let shift = diagonalize(&model).unwrap().shift;
        prop_assert!(d.values[0] >= shift - 1e-10);
    }
}
