use std::f64::consts::PI;

use bose2d::bogoliubov::dispersion;
use bose2d::lattice::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sbog_passes_cutoff_doubling(c in 150.0f64..600.0, coupling in 0.2f64..5.0) {
        for strategy in [SumStrategy::IntegralTail, SumStrategy::PlainShells] {
            let a = sum_sbog_with(&SbogOptions { cutoff: c, strategy, coupling }).unwrap();
            let b = sum_sbog_with(&SbogOptions { cutoff: 2.0 * c, strategy, coupling }).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.tail_bound, "{strategy:?}: {} vs {} (bound {})", a.value, b.value, a.tail_bound);
        }
    }

    #[test]
    fn j0_sums_pass_cutoff_doubling(ell in 0.05f64..1.0, c in 300.0f64..800.0) {
        for strategy in [SumStrategy::IntegralTail, SumStrategy::ShellAverage, SumStrategy::PlainShells] {
            let o = |cut| J0Options { strategy, cutoff: Some(cut), ..J0Options::default() };
            let a = sum_j0(ell, &o(c)).unwrap();
            let b = sum_j0(ell, &o(2.0 * c)).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.tail_bound, "{strategy:?} ℓ = {ell}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn dispersion_is_increasing(p in 1e-3f64..1e3, dp in 1e-6f64..10.0) {
        prop_assert!(dispersion((p + dp) * (p + dp), 1.0) > dispersion(p * p, 1.0));
    }
}

/// Point-by-point sums over the square |j|, |k| ≤ K restricted to the disk,
/// to compare with the shell-grouped sums.
fn point_sum(m_max: i64, term: impl Fn(f64) -> f64) -> f64 {
    let k = (m_max as f64).sqrt() as i64 + 1;
    let mut acc = bose2d::CompensatedSum::new();
    for j in -k..=k {
        for l in -k..=k {
            let m = j * j + l * l;
            if m > 0 && m <= m_max {
                acc.add(term(4.0 * PI * PI * m as f64));
            }
        }
    }
    acc.value()
}

#[test]
fn shell_and_point_summation_agree() {
    let cutoff = 40.0 * PI;
    let m_max = shell_index_max(cutoff) as i64;
    let shells = sum_sbog_with(&SbogOptions {
        cutoff,
        strategy: SumStrategy::PlainShells,
        coupling: 1.0,
    })
    .unwrap();
    let points = 0.5 * point_sum(m_max, |p2| sbog_summand(p2, 1.0));
    assert!((shells.value - points).abs() < 1e-12 * points.abs().max(1.0), "{} vs {}", shells.value, points);

    let ell = 0.3;
    let j0 = sum_j0(
        ell,
        &J0Options {
            strategy: SumStrategy::PlainShells,
            cutoff: Some(cutoff),
            ..J0Options::default()
        },
    )
    .unwrap();
    let points = point_sum(m_max, |p2| bose2d::special::j0(ell * p2.sqrt()) / p2);
    assert!((j0.value - points).abs() < 1e-12, "{} vs {}", j0.value, points);
}

#[test]
fn energy_r_derivative_matches_central_difference() {
    let a = 0.1;
    let cutoff = 400.0 * PI;
    let opts = EnergyOptions {
        sbog_cutoff: Some(cutoff),
        ..EnergyOptions::default()
    };
    let h = 1e-4;
    let e = |r: f64| energy_enr(r, 10, a, &opts).unwrap().e;
    let fd = (e(1.0 + h) - e(1.0 - h)) / (2.0 * h);
    let analytic = energy_enr_d_coupling(1.0, 10, a, cutoff, &J0Options::default()).unwrap();
    assert!((fd - analytic).abs() < 1e-4, "{fd} vs {analytic}");
}

#[test]
fn phonon_slope() {
    let slope = (8.0 * PI).sqrt();
    let mut last = f64::INFINITY;
    for k in 1..8 {
        let p = 2.0 * PI * 10f64.powi(-k);
        let dev = (dispersion(p * p, 1.0) / p - slope).abs();
        assert!(dev < last);
        last = dev;
    }
    assert!(last < 1e-6);
}

#[test]
fn thermodynamic_defect_decreases_with_r() {
    let a = 0.10643788282328882;
    let v: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&r| energy_enr(r, 10, a, &EnergyOptions::default()).unwrap().scaled_defect)
        .collect();
    assert!(v[1] < v[0] && v[2] < v[1], "{v:?}");
}
