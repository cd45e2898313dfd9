use bose2d::potentials::Potential;
use bose2d::scattering::{solve_neumann, NeumannOptions};
use proptest::prelude::*;

fn disk() -> Potential {
    Potential::soft_disk(2.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profile_stays_in_the_unit_interval(log_r in 1.0f64..6.0, v0 in 0.5f64..20.0) {
        let pot = Potential::soft_disk(v0, 1.0).unwrap();
        let s = solve_neumann(&pot, 10f64.powf(log_r), &NeumannOptions::default()).unwrap();
        for &f in &s.f {
            prop_assert!((0.0..=1.0 + 1e-14).contains(&f), "f = {f}");
        }
        prop_assert!((s.f[s.f.len() - 1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_is_grid_independent(log_r in 1.5f64..6.0) {
        let opts = NeumannOptions::default();
        let r = 10f64.powf(log_r);
        let a = solve_neumann(&disk(), r, &opts).unwrap().lambda;
        let b = solve_neumann(&disk(), r, &opts.refined()).unwrap().lambda;
        prop_assert!(((a - b) / a).abs() <= 0.1 * opts.tol, "R = {r}: {a} vs {b}");
    }
}

#[test]
fn eps_sq_log_ratio_tends_to_one_monotonically() {
    let ratios: Vec<f64> = [1e3, 1e4, 1e5, 1e6]
        .iter()
        .map(|&r| solve_neumann(&disk(), r, &NeumannOptions::default()).unwrap().asymptotic_defects().unwrap().eps_sq_ratio)
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0] && w[1] > 1.0, "{ratios:?}");
    }
}

#[test]
fn scaled_asymptotic_residuals_stay_within_a_decade() {
    let d: Vec<_> = [1e3, 1e4, 1e5, 1e6]
        .iter()
        .map(|&r| solve_neumann(&disk(), r, &NeumannOptions::default()).unwrap().asymptotic_defects().unwrap())
        .collect();
    let picks: [fn(&bose2d::scattering::AsymptoticDefects) -> f64; 3] = [|x| x.eigenvalue, |x| x.int_vf, |x| x.far_field];
    for pick in picks {
        let v: Vec<f64> = d.iter().map(pick).collect();
        let hi = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(v.iter().all(|&x| x > 0.0) && hi / lo <= 10.0, "{v:?}");
    }
}
