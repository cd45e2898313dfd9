//! Aggregated consistency suites.
//!
//! Every check records the measured quantity, the threshold it was compared
//! against and a few named diagnostics. Reports carry no timings or other
//! run-dependent data, so a suite run twice serializes identically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bogoliubov::{diagonalize, dispersion, QuadraticModel};
use crate::coefficients::{bogoliubov_defect, build_table, check_scattering_identity, lemma_bounds, norm_checks, GPParams};
use crate::error::{Error, Result};
use crate::fock::{block_structure, build, compare_analytic, gp_slice_check, ground_state_positivity, lowest_eigs};
use crate::lanczos::{EigenMethod, LanczosOptions};
use crate::lattice::{energy_en, energy_enr, i_ell, spectrum_bruteforce, spectrum_enumerate, sum_sbog, EnergyOptions, J0Options};
use crate::potentials::Potential;
use crate::scattering::{solve_neumann, NeumannOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Scattering,
    Coefficients,
    Sums,
    Ed,
    All,
}

impl Suite {
    const PARTS: [Suite; 5] = [Suite::Scattering, Suite::Identities, Suite::Coefficients, Suite::Sums, Suite::Ed];

    fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Scattering => "scattering",
            Suite::Coefficients => "coefficients",
            Suite::Sums => "sums",
            Suite::Ed => "ed",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "scattering" => Ok(Suite::Scattering),
            "coefficients" => Ok(Suite::Coefficients),
            "sums" => Ok(Suite::Sums),
            "ed" => Ok(Suite::Ed),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity; the check passes when it does not exceed
    /// `threshold` (plus whatever else `passed` records).
    pub value: f64,
    pub threshold: f64,
    pub data: BTreeMap<String, f64>,
    /// Set when the computation itself failed.
    pub error: Option<String>,
}

impl Check {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= threshold,
            value,
            threshold,
            data: BTreeMap::new(),
            error: None,
        }
    }

    fn with(mut self, key: impl Into<String>, v: f64) -> Self {
        self.data.insert(key.into(), v);
        self
    }

    fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            passed: false,
            value: f64::NAN,
            threshold: f64::NAN,
            data: BTreeMap::new(),
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks().find(|c| c.name == name)
    }
}

type CheckFn = fn() -> Result<Check>;

fn suite_checks(suite: Suite) -> Vec<(&'static str, CheckFn)> {
    match suite {
        Suite::Scattering => vec![
            ("scattering_length_dual", scattering_length_dual as CheckFn),
            ("eigenvalue_asymptotics", eigenvalue_asymptotics),
            ("int_vf_asymptotics", int_vf_asymptotics),
            ("far_field_expansion", far_field_expansion),
        ],
        Suite::Identities => vec![
            ("i_ell_invariance", i_ell_invariance as CheckFn),
            ("energy_form_equality", energy_form_equality),
            ("scattering_identity", scattering_identity),
        ],
        Suite::Coefficients => vec![
            ("lemma_bounds", lemma_bounds_check as CheckFn),
            ("coefficient_norms", coefficient_norms),
            ("bogoliubov_defect_decay", defect_decay),
        ],
        Suite::Sums => vec![
            ("sbog_cutoff_doubling", sbog_doubling as CheckFn),
            ("thermodynamic_consistency", thermodynamic_consistency),
            ("spectrum_enumeration", spectrum_enumeration),
        ],
        Suite::Ed => vec![
            ("ed_single_pair", ed_single_pair as CheckFn),
            ("gp_slice", gp_slice),
            ("ed_sector_structure", ed_sector_structure),
            ("ed_dense_vs_lanczos", ed_dense_vs_lanczos),
            ("ed_perron_frobenius", ed_perron_frobenius),
            ("ed_monotone_in_n_max", ed_monotone),
        ],
        Suite::All => Vec::new(),
    }
}

fn run_part(suite: Suite) -> SuiteReport {
    let checks: Vec<Check> = suite_checks(suite)
        .into_iter()
        .map(|(name, f)| {
            let mut c = f().unwrap_or_else(|e| Check::failed(name, &e));
            c.name = name.to_string();
            c
        })
        .collect();
    SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Runs one suite (or all of them, in a fixed order).
pub fn run_suite(suite: Suite) -> VerifyReport {
    let parts: Vec<Suite> = if suite == Suite::All {
        Suite::PARTS.to_vec()
    } else {
        vec![suite]
    };
    let suites: Vec<SuiteReport> = parts.into_iter().map(run_part).collect();
    VerifyReport {
        suite,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

fn reference_disk() -> Result<Potential> {
    Potential::soft_disk(2.0, 1.0)
}

/// max |x| / min |x|; infinite if some entry vanishes or signs differ.
fn spread(values: &[f64]) -> f64 {
    let same_sign = values.iter().all(|&v| v > 0.0) || values.iter().all(|&v| v < 0.0);
    if !same_sign {
        return f64::INFINITY;
    }
    let hi = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    hi / lo
}

// ---------------------------------------------------------------------------
// scattering

fn scattering_length_dual() -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut c = Check::new("", 0.0, 1e-8);
    for v0 in [0.1, 1.0, 10.0, 100.0] {
        let p = Potential::soft_disk(v0, 1.0)?;
        let a = p.scattering_length_closed_form()?.a;
        let b = p.scattering_length_ode()?.a;
        let rel = (a - b).abs() / a;
        worst = worst.max(rel);
        c = c.with(format!("a_v0={v0}"), a).with(format!("rel_v0={v0}"), rel);
    }
    Ok(Check { value: worst, passed: worst <= 1e-8, ..c })
}

const SWEEP: [f64; 4] = [1e3, 1e4, 1e5, 1e6];

fn sweep_check(pick: fn(&crate::scattering::AsymptoticDefects) -> f64) -> Result<Check> {
    let pot = reference_disk()?;
    let mut c = Check::new("", 0.0, 10.0);
    let mut values = Vec::new();
    for r in SWEEP {
        let s = solve_neumann(&pot, r, &NeumannOptions::default())?;
        let d = s
            .asymptotic_defects()
            .ok_or_else(|| Error::domain("asymptotics need a scattering length"))?;
        let v = pick(&d);
        c = c.with(format!("R={r:e}"), v);
        values.push(v);
    }
    let s = spread(&values);
    Ok(Check { value: s, passed: s <= 10.0, ..c })
}

fn eigenvalue_asymptotics() -> Result<Check> {
    sweep_check(|d| d.eigenvalue)
}

fn int_vf_asymptotics() -> Result<Check> {
    sweep_check(|d| d.int_vf)
}

fn far_field_expansion() -> Result<Check> {
    sweep_check(|d| d.far_field)
}

// ---------------------------------------------------------------------------
// identities

fn i_ell_invariance() -> Result<Check> {
    let a = reference_disk()?.scattering_length()?.a;
    let opts = J0Options::default();
    let i: Vec<_> = [0.2, 0.1, 0.05].iter().map(|&l| i_ell(l, a, &opts)).collect::<Result<_>>()?;
    let mut c = Check::new("", 0.0, 1.0);
    let mut ratio: f64 = 0.0;
    let mut ok = true;
    for k in 0..2 {
        let diff = (i[k].value - i[k + 1].value).abs();
        let bound = i[k].tail_bound + i[k + 1].tail_bound;
        ok &= i[k].tail_bound <= 1e-5 && i[k + 1].tail_bound <= 1e-5;
        ratio = ratio.max(diff / bound);
        c = c.with(format!("diff_{}_{}", i[k].ell, i[k + 1].ell), diff).with(format!("bound_{}_{}", i[k].ell, i[k + 1].ell), bound);
    }
    for x in &i {
        c = c.with(format!("I_{}", x.ell), x.value);
    }
    Ok(Check { value: ratio, passed: ratio <= 1.0 && ok, ..c })
}

fn energy_form_equality() -> Result<Check> {
    let mut c = Check::new("", 0.0, 1.0);
    let mut ratio: f64 = 0.0;
    let mut ok = true;
    for a in [0.05, 0.1, 0.3] {
        let e = energy_en(10, a, &EnergyOptions::default())?;
        ok &= e.form_tail_bound <= 1e-5;
        ratio = ratio.max(e.form_difference.abs() / e.form_tail_bound);
        c = c.with(format!("diff_a={a}"), e.form_difference).with(format!("bound_a={a}"), e.form_tail_bound);
    }
    Ok(Check { value: ratio, passed: ratio <= 1.0 && ok, ..c })
}

fn scattering_identity() -> Result<Check> {
    let pot = reference_disk()?;
    let mut c = Check::new("", 0.0, 1.0);
    let mut residuals = Vec::new();
    let mut within = true;
    for (p_max, q_cut) in [(64.0 * PI, 32.0 * PI), (128.0 * PI, 64.0 * PI), (256.0 * PI, 128.0 * PI)] {
        let t = build_table(&pot, &GPParams::new(8).with_p_max(p_max))?;
        let r = check_scattering_identity(&t, &pot, q_cut)?;
        within &= r.within_tail_bound && r.max_residual <= r.tail_bound;
        let key = format!("{:.0}pi", p_max / PI);
        c = c
            .with(format!("residual_pmax={key}"), r.max_residual)
            .with(format!("tail_pmax={key}"), r.tail_bound)
            .with(format!("untruncated_pmax={key}"), r.max_untruncated);
        residuals.push(r.max_residual);
    }
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    let last = residuals[residuals.len() - 1] / residuals[0];
    Ok(Check {
        value: last,
        passed: within && decreasing,
        ..c
    })
}

// ---------------------------------------------------------------------------
// coefficients

const TABLE_NS: [u64; 3] = [8, 12, 16];

fn lemma_bounds_check() -> Result<Check> {
    let pot = reference_disk()?;
    let mut c = Check::new("", 0.0, 0.0);
    let mut violations = 0usize;
    for n in TABLE_NS {
        let t = build_table(&pot, &GPParams::new(n))?;
        let r = lemma_bounds(&t);
        let v = r.lower_violations + r.gap_violations;
        violations += v;
        c = c.with(format!("shells_N={n}"), r.shells as f64).with(format!("violations_N={n}"), v as f64);
    }
    Ok(Check {
        value: violations as f64,
        passed: violations == 0,
        ..c
    })
}

/// ‖η‖/ℓ, |η_0|/ℓ² and the ω̂ decay constant are N-independent up to
/// constants; checks they stay within a factor 2 over the table sizes.
fn coefficient_norms() -> Result<Check> {
    let pot = reference_disk()?;
    let mut c = Check::new("", 0.0, 2.0);
    let (mut a, mut b, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for n in TABLE_NS {
        let t = build_table(&pot, &GPParams::new(n))?;
        let r = norm_checks(&t);
        a.push(r.eta_norm_sq);
        b.push(r.eta0);
        d.push(r.omega_decay_constant);
        c = c
            .with(format!("eta_norm_sq_N={n}"), r.eta_norm_sq)
            .with(format!("eta0_N={n}"), r.eta0)
            .with(format!("omega_decay_N={n}"), r.omega_decay_constant);
    }
    let s = spread(&a).max(spread(&b)).max(spread(&d));
    Ok(Check { value: s, passed: s <= 2.0, ..c })
}

fn defect_decay() -> Result<Check> {
    let pot = reference_disk()?;
    let mut c = Check::new("", 0.0, 1.0);
    let mut defects = Vec::new();
    for n in TABLE_NS {
        let t = build_table(&pot, &GPParams::new(n))?;
        let r = bogoliubov_defect(&t)?;
        defects.push(r.max_defect);
        c = c.with(format!("max_defect_N={n}"), r.max_defect).with(format!("defect_constant_N={n}"), r.defect_constant);
    }
    let decreasing = defects.windows(2).all(|w| w[1] < w[0]);
    let ratio = defects[defects.len() - 1] / defects[0];
    Ok(Check {
        value: ratio,
        passed: decreasing,
        ..c
    })
}

// ---------------------------------------------------------------------------
// sums

fn sbog_doubling() -> Result<Check> {
    let a = sum_sbog(200.0 * PI)?;
    let b = sum_sbog(400.0 * PI)?;
    let diff = (a.value - b.value).abs();
    Ok(Check::new("", diff, a.tail_bound)
        .with("value_200pi", a.value)
        .with("value_400pi", b.value)
        .with("tail_400pi", b.tail_bound))
}

fn thermodynamic_consistency() -> Result<Check> {
    let a = reference_disk()?.scattering_length()?.a;
    let mut c = Check::new("", 0.0, 1.0);
    let mut values = Vec::new();
    for r in [1e2, 1e3, 1e4] {
        let e = energy_enr(r, 10, a, &EnergyOptions::default())?;
        values.push(e.scaled_defect);
        c = c.with(format!("scaled_defect_R={r:e}"), e.scaled_defect).with(format!("scaled_tail_R={r:e}"), e.tail_bound / (r * r));
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    Ok(Check {
        value: values[values.len() - 1] / values[0],
        passed: decreasing,
        ..c
    })
}

fn spectrum_enumeration() -> Result<Check> {
    let zeta = 3.0 * dispersion(4.0 * PI * PI, 1.0);
    let a = spectrum_enumerate(zeta, 1_000_000)?;
    let b = spectrum_bruteforce(zeta, 10_000_000)?;
    let mismatches = if a.len() != b.len() {
        a.len().max(b.len())
    } else {
        a.iter().zip(&b).filter(|(x, y)| x != y).count()
    };
    let states: usize = a.iter().map(|l| l.degeneracy).sum();
    Ok(Check::new("", mismatches as f64, 0.0)
        .with("levels", a.len() as f64)
        .with("states", states as f64)
        .with("zeta", zeta))
}

// ---------------------------------------------------------------------------
// ed

fn ed_single_pair() -> Result<Check> {
    let model = QuadraticModel::from_fg(&[(2.0, 1.0)])?;
    let r = compare_analytic(&model, 40, 3, EigenMethod::Auto)?;
    let e = 3f64.sqrt();
    let ground = (r.eigs[0] - (e - 2.0)).abs();
    let gap1 = (r.eigs[1] - r.eigs[0] - e).abs();
    let gap2 = (r.eigs[2] - r.eigs[0] - e).abs();
    // the second distinct gap 2√3 sits above the two-fold first level
    let r6 = compare_analytic(&model, 40, 6, EigenMethod::Auto)?;
    let gap_two = (r6.eigs[3] - r6.eigs[0] - 2.0 * e).abs();
    let gaps = gap1.max(gap2).max(gap_two);
    Ok(Check::new("", ground, 1e-8)
        .require(gaps <= 1e-6)
        .with("ground_error", ground)
        .with("gap_error_sqrt3", gap1.max(gap2))
        .with("gap_error_2sqrt3", gap_two)
        .with("dimension", r.dimension as f64))
}

fn gp_slice() -> Result<Check> {
    let table = build_table(&reference_disk()?, &GPParams::new(10))?;
    let r = gp_slice_check(&table, 1, 30)?;
    let s = &r.shells[0];
    Ok(Check::new("", s.gap_error.abs(), 1e-4)
        .require(s.within_defect && s.converging)
        .with("p_sq", s.p_sq)
        .with("ed_gap", s.ed_gap)
        .with("frequency", s.frequency)
        .with("dispersion", s.dispersion)
        .with("dispersion_deviation", s.dispersion_deviation)
        .with("defect_bound", s.defect_bound)
        .with("ground_error", s.ground_error))
}

fn ed_sector_structure() -> Result<Check> {
    let model = QuadraticModel::from_fg(&[(2.0, 1.0), (3.0, -0.5), (1.5, 0.7)])?;
    let (basis, h) = build(&model, 8)?;
    let r = block_structure(&basis, &h);
    Ok(Check::new("", r.cross_max, 0.0)
        .require(r.cross_entries == 0 && r.pair_transitions_only)
        .with("sectors", r.sectors as f64)
        .with("dimension", basis.dim() as f64))
}

fn ed_dense_vs_lanczos() -> Result<Check> {
    let model = QuadraticModel::from_fg(&[(2.0, 0.9), (2.7, -1.3)])?;
    let (_, h) = build(&model, 12)?;
    let opts = LanczosOptions::default();
    let d = lowest_eigs(&h, 6, EigenMethod::Auto, &opts)?;
    let l = lowest_eigs(&h, 6, EigenMethod::Lanczos, &opts)?;
    let dev = d.values.iter().zip(&l.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Check::new("", dev, 1e-8).with("dimension", h.dim() as f64))
}

fn ed_perron_frobenius() -> Result<Check> {
    let model = QuadraticModel::from_fg(&[(2.0, 1.0), (3.0, -2.0)])?;
    let (basis, h) = build(&model, 12)?;
    let e = lowest_eigs(&h, 1, EigenMethod::Auto, &LanczosOptions::default())?;
    let r = ground_state_positivity(&model, &basis, &e.vectors[0]);
    // the check passes when the most negative gauge-fixed component is ≥ −1e-12
    Ok(Check::new("", -r.min_relative_component, 1e-12)
        .require(r.positive)
        .with("off_sector_weight", r.off_sector_weight))
}

fn ed_monotone() -> Result<Check> {
    let model = QuadraticModel::from_fg(&[(2.0, 1.5), (2.5, -1.0)])?;
    let shift = diagonalize(&model)?.shift;
    let opts = LanczosOptions::default();
    let mut c = Check::new("", 0.0, 0.0);
    let mut prev: Option<Vec<f64>> = None;
    let mut worst: f64 = 0.0;
    let mut floor = true;
    for n in (4..=20).step_by(4) {
        let (_, h) = build(&model, n)?;
        let e = lowest_eigs(&h, 4, EigenMethod::Auto, &opts)?.values;
        floor &= e[0] >= shift - 1e-10;
        if let Some(p) = &prev {
            for (a, b) in e.iter().zip(p) {
                worst = worst.max(a - b);
            }
        }
        c = c.with(format!("ground_n_max={n}"), e[0]);
        prev = Some(e);
    }
    Ok(Check {
        value: worst.max(0.0),
        passed: worst <= 1e-12 && floor,
        ..c.with("shift", shift)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Identities, Suite::Scattering, Suite::Coefficients, Suite::Sums, Suite::Ed, Suite::All] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn ed_suite_passes() {
        let r = run_suite(Suite::Ed);
        for c in r.checks() {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(r.suites[0].checks.len(), 6);
    }

    #[test]
    fn spread_needs_a_common_sign() {
        assert_eq!(spread(&[1.0, 2.0, 4.0]), 4.0);
        assert!(spread(&[1.0, -2.0]).is_infinite());
    }
}
