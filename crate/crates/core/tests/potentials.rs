use bose2d::potentials::Potential;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_and_ode_scattering_lengths_agree(log_v0 in -2.0f64..4.0, r0 in 0.5f64..2.0) {
        let p = Potential::soft_disk(10f64.powf(log_v0), r0).unwrap();
        let a = p.scattering_length_closed_form().unwrap().a;
        let b = p.scattering_length_ode().unwrap().a;
        prop_assert!((a - b).abs() <= 1e-8 * a, "v0 = {}: {a} vs {b}", 10f64.powf(log_v0));
    }

    #[test]
    fn scattering_length_increases_with_v0(log_v0 in -2.0f64..4.0, step in 0.01f64..1.0) {
        let lo = Potential::soft_disk(10f64.powf(log_v0), 1.0).unwrap().scattering_length().unwrap().a;
        let hi = Potential::soft_disk(10f64.powf(log_v0 + step), 1.0).unwrap().scattering_length().unwrap().a;
        prop_assert!(hi > lo);
        prop_assert!(hi < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn soft_disk_transform_matches_closed_form(k in 0.0f64..60.0, v0 in 0.1f64..50.0) {
        let p = Potential::soft_disk(v0, 1.0).unwrap();
        let quad = p.fourier_hat(k).unwrap();
        let exact = Potential::soft_disk_hat_reference(v0, 1.0, k);
        prop_assert!((quad - exact).abs() <= 1e-9 * v0, "k = {k}: {quad} vs {exact}");
    }
}
