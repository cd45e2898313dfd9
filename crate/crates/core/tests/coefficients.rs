use std::f64::consts::PI;

use bose2d::coefficients::*;
use bose2d::potentials::Potential;
use bose2d::special::j1_zero;
use proptest::prelude::*;

fn disk() -> Potential {
    Potential::soft_disk(2.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tabulated_coefficients_satisfy_the_pointwise_bounds(n in 8u64..=20, alpha in 2.0f64..3.0) {
        let mut params = GPParams::new(n);
        params.alpha = alpha;
        let t = build_table(&disk(), &params).unwrap();
        for s in &t.shells {
            prop_assert!(0.5 * s.p_sq <= s.f);
            prop_assert!(s.g.abs() < s.f);
            prop_assert!(s.f <= 2.0 * (1.0 + s.p_sq), "F = {} at p² = {}", s.f, s.p_sq);
            prop_assert!(((2.0 * s.tau).tanh() + s.g / s.f).abs() < 1e-12);
            // (F − G)(F + G) = p⁴ + 2p²ω̂
            let lhs = (s.f - s.g) * (s.f + s.g);
            let rhs = s.p_sq * s.p_sq + 2.0 * s.p_sq * s.omega_hat;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            if t.ell * s.p_sq.sqrt() <= 1.0 {
                prop_assert!(s.omega_hat >= 0.0);
            }
        }
        let b = lemma_bounds(&t);
        prop_assert!(b.eta_decay_constant <= b.eta_decay_bound);
        prop_assert_eq!(t.omega_hat0, PI * t.g_n);
        prop_assert!((t.g_n - 2.0 * n as f64 * t.eps_sq).abs() <= 1e-13 * t.g_n);
    }

    #[test]
    fn eta_is_radial(m in 1u64..300, n in 8u64..=14) {
        let t = build_table(&disk(), &GPParams::new(n)).unwrap();
        // every lattice vector 2π(j, k) with j² + k² = m
        let r = (m as f64).sqrt() as i64 + 1;
        let mut values = Vec::new();
        for j in -r..=r {
            for k in -r..=r {
                if (j * j + k * k) as u64 == m {
                    values.push(t.eta_at(2.0 * PI * ((j as f64).powi(2) + (k as f64).powi(2)).sqrt()));
                    values.push(t.eta_at((2.0 * PI * j as f64).hypot(2.0 * PI * k as f64)));
                }
            }
        }
        for v in &values {
            prop_assert!((v - values[0]).abs() <= 1e-10 * values[0].abs());
        }
        if let Some(s) = t.shell(m) {
            prop_assert!((s.eta - values[0]).abs() <= 1e-10 * s.eta.abs());
        }
    }
}

fn sweep() -> Vec<CoefficientTable> {
    [8u64, 12, 16, 20].iter().map(|&n| build_table(&disk(), &GPParams::new(n)).unwrap()).collect()
}

#[test]
fn couplings_converge_like_one_over_n() {
    let tables = sweep();
    let g: Vec<f64> = tables.iter().map(|t| (t.g_n - 4.0) * t.params.n as f64).collect();
    let o: Vec<f64> = tables.iter().map(|t| (t.omega_hat0 - t.params.n as f64 * t.int_vf).abs() * t.params.n as f64).collect();
    for v in [&g, &o] {
        let hi = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(hi / lo < 3.0, "{v:?}");
    }
    let defects: Vec<f64> = tables.iter().map(|t| bogoliubov_defect(t).unwrap().max_defect).collect();
    for w in defects.windows(2) {
        assert!(w[1] < w[0], "{defects:?}");
    }
}

#[test]
fn norms_are_stable_across_n() {
    let reports: Vec<NormReport> = [8u64, 12, 16].iter().map(|&n| norm_checks(&build_table(&disk(), &GPParams::new(n)).unwrap())).collect();
    let picks: [fn(&NormReport) -> f64; 3] = [|r| r.eta_norm_sq, |r| r.eta0, |r| r.omega_decay_constant];
    for pick in picks {
        let v: Vec<f64> = reports.iter().map(pick).collect();
        let hi = v.iter().fold(0.0f64, |m, x| m.max(*x));
        let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        assert!(lo > 0.0 && hi / lo <= 2.0, "{v:?}");
    }
}

#[test]
fn omega_hat_changes_sign_only_beyond_the_first_bessel_zero() {
    let t = build_table(&disk(), &GPParams::new(8).with_p_max(256.0 * PI)).unwrap();
    let first = norm_checks(&t).omega_first_negative.expect("the table reaches past the first zero");
    let z = j1_zero(1);
    assert!((z - 3.8317).abs() < 1e-4);
    assert!(first >= z, "{first}");
    // lattice spacing in ℓ|p| near the zero
    assert!(first - z < 2.0 * PI * t.ell * 2.0, "{first}");
}

#[test]
fn scattering_identity_residual_decreases_under_cutoff_doubling() {
    let pot = disk();
    let mut last = f64::INFINITY;
    for (p_max, q_cut) in [(64.0 * PI, 32.0 * PI), (128.0 * PI, 64.0 * PI), (256.0 * PI, 128.0 * PI)] {
        let t = build_table(&pot, &GPParams::new(8).with_p_max(p_max)).unwrap();
        let r = check_scattering_identity(&t, &pot, q_cut).unwrap();
        assert!(r.within_tail_bound && r.max_residual <= r.tail_bound);
        assert!(r.max_residual < last);
        last = r.max_residual;
    }
}

#[test]
fn zero_potential_has_vanishing_identity_residual() {
    let zero = Potential::soft_disk(0.0, 1.0).unwrap();
    let t = build_table(&zero, &GPParams::new(8)).unwrap();
    assert!(t.shells.iter().all(|s| s.eta == 0.0 && s.omega_hat == 0.0));
    let r = check_scattering_identity(&t, &zero, 8.0 * PI).unwrap();
    assert_eq!(r.max_residual, 0.0);
}
