//! Sums over the punctured momentum lattice Λ*₊ = 2πℤ² ∖ {0}.
//!
//! Radial summands are grouped by the integer shell index m = |p/2π|², with
//! r₂(m) lattice points per shell. Reductions go through fixed-size chunks
//! combined in ascending order with compensated summation, so results do not
//! depend on the thread count.
//!
//! Two sums carry the energy formulas:
//!
//! ```text
//!     S_Bog = ½ Σ_p [√(p⁴ + 8πp²) − p² − 4π + (4π)²/(2p²)],
//!     Σ_p J₀(ℓ|p|)/p².
//! ```
//!
//! The first converges like |p|⁻⁴ and is summed over shells with an
//! asymptotic integral tail plus a Gauss-circle boundary correction. The
//! second converges only conditionally; the default evaluation splits it
//! with a heat kernel (Ewald) into a Gaussian-damped lattice sum and a sum of
//! periodic images, both exponentially convergent.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bogoliubov::dispersion;
use crate::error::{Error, Result};
use crate::quadrature::{composite, gl20};
use crate::special::{e1_plus_log, j0, EULER_GAMMA};
use crate::summation::{compensated_sum, CompensatedSum};

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shell {
    /// m = |p|²/(4π²).
    pub m: u64,
    pub p_sq: f64,
    /// r₂(m): number of lattice points on the shell.
    pub multiplicity: u32,
}

/// r₂(m) for 0 ≤ m ≤ `m_max` (with r₂(0) set to 0).
pub fn shell_counts(m_max: u64) -> Vec<u32> {
    let mut counts = vec![0u32; m_max as usize + 1];
    let mut j: u64 = 0;
    while j * j <= m_max {
        let mut k: u64 = 0;
        while j * j + k * k <= m_max {
            if j > 0 || k > 0 {
                let w = if j > 0 { 2 } else { 1 } * if k > 0 { 2 } else { 1 };
                counts[(j * j + k * k) as usize] += w;
            }
            k += 1;
        }
        j += 1;
    }
    counts
}

/// All nonempty shells with |p| ≤ `r_max`, ascending.
pub fn shell_enumerate(r_max: f64) -> Result<Vec<Shell>> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::domain("shell radius must be positive and finite"));
    }
    let m_max = shell_index_max(r_max);
    Ok(shell_counts(m_max)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| Shell {
            m: m as u64,
            p_sq: 4.0 * PI * PI * m as f64,
            multiplicity: c,
        })
        .collect())
}

/// Largest integer m with 2π√m ≤ r (with a relative slack of 1e-12).
pub fn shell_index_max(r: f64) -> u64 {
    let x = r / (2.0 * PI);
    (x * x * (1.0 + 1e-12)).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumStrategy {
    /// Bare shell sum; tail bound from an absolute envelope.
    PlainShells,
    /// Integral tail, averaged over cutoffs spanning one oscillation of J₀.
    ShellAverage,
    /// Shell sum plus asymptotic integral tail and Gauss-circle correction.
    IntegralTail,
    /// Heat-kernel split (J₀ sums only).
    Ewald,
}

impl std::str::FromStr for SumStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain-shells" => Ok(Self::PlainShells),
            "shell-average" => Ok(Self::ShellAverage),
            "integral-tail" => Ok(Self::IntegralTail),
            "ewald" => Ok(Self::Ewald),
            other => Err(Error::Config(format!("unknown summation strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSumResult {
    pub value: f64,
    /// Shell radius |p| of the last included shell (for Ewald: the
    /// reciprocal-space cutoff).
    pub cutoff: f64,
    pub tail_bound: f64,
    pub strategy: SumStrategy,
}

/// Ordered, chunked, compensated Σ_m r₂(m)·term(m) over 1 ≤ m ≤ len − 1.
fn shell_sum<F>(counts: &[u32], term: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let partials: Vec<f64> = counts
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = CompensatedSum::<f64>::new();
            for (i, &r) in chunk.iter().enumerate() {
                if r > 0 {
                    acc.add(r as f64 * term((c * CHUNK + i) as u64));
                }
            }
            acc.value()
        })
        .collect();
    compensated_sum(partials)
}

/// Points with 0 ≤ m ≤ M (origin included) minus the area πM.
fn circle_discrepancy(counts: &[u32]) -> f64 {
    let m = (counts.len() - 1) as f64;
    let total: u64 = counts.iter().map(|&c| c as u64).sum::<u64>() + 1;
    total as f64 - PI * m
}

/// Empirical constant C with |E(ρ)| ≤ C ρ^{2/3} over the enumerated range,
/// doubled for safety (E = lattice-point discrepancy in lattice units).
fn discrepancy_constant(counts: &[u32]) -> f64 {
    let mut total: u64 = 1;
    let mut worst: f64 = 0.0;
    let m_max = counts.len() - 1;
    for (m, &c) in counts.iter().enumerate() {
        total += c as u64;
        if m >= 1 && (m >= m_max / 4 || m_max < 64) {
            let rho = (m as f64).sqrt();
            let e_hi = (total as f64 - PI * m as f64).abs();
            // just below the next shell the count is the same, the area larger
            let e_lo = (total as f64 - PI * (m + 1) as f64).abs();
            worst = worst.max(e_hi.max(e_lo) / rho.powf(2.0 / 3.0));
        }
    }
    2.0 * worst.max(1.0)
}

// ---------------------------------------------------------------------------
// S_Bog

/// Summand of S_Bog^{(R)} without the ½, written to avoid cancellation:
/// √(p⁴ + 8πRp²) − p² − 4πR + 8π²R²/p² = 64π³R³(s + 3p²)/(s + p²)³.
pub fn sbog_summand(p_sq: f64, coupling: f64) -> f64 {
    let s = dispersion(p_sq, coupling);
    64.0 * PI.powi(3) * coupling.powi(3) * (s + 3.0 * p_sq) / (s + p_sq).powi(3)
}

/// ∂_R of [`sbog_summand`]: 128π³R²(s + 2p²)/(s (s + p²)²).
pub fn sbog_summand_d_coupling(p_sq: f64, coupling: f64) -> f64 {
    let s = dispersion(p_sq, coupling);
    128.0 * PI.powi(3) * coupling * coupling * (s + 2.0 * p_sq) / (s * (s + p_sq).powi(2))
}

/// Generalized binomial coefficients C(1/2, k) for k ≥ 3 until negligible
/// against x^k, returning Σ_k C(1/2,k) x^k w(k).
fn half_binomial_series(x: f64, w: impl Fn(u32) -> f64) -> f64 {
    let mut c = 1.0; // C(1/2, 0)
    let mut xk = 1.0;
    let mut acc = 0.0;
    for k in 1..400u32 {
        c *= (0.5 - (k - 1) as f64) / k as f64;
        xk *= x;
        if k >= 3 {
            let term = c * xk * w(k);
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
        }
    }
    acc
}

/// (1/2π) ∫_P^∞ g(ρ) ρ dρ for the S_Bog^{(R)} summand g (large-p series).
fn sbog_area_tail(p: f64, coupling: f64) -> f64 {
    let x = 8.0 * PI * coupling / (p * p);
    p.powi(4) / (2.0 * PI) * half_binomial_series(x, |k| 1.0 / (2.0 * k as f64 - 4.0))
}

fn sbog_area_tail_d_coupling(p: f64, coupling: f64) -> f64 {
    let x = 8.0 * PI * coupling / (p * p);
    p.powi(4) / (2.0 * PI * coupling) * half_binomial_series(x, |k| k as f64 / (2.0 * k as f64 - 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SbogOptions {
    pub cutoff: f64,
    pub strategy: SumStrategy,
    pub coupling: f64,
}

impl Default for SbogOptions {
    fn default() -> Self {
        Self {
            cutoff: 400.0 * PI,
            strategy: SumStrategy::IntegralTail,
            coupling: 1.0,
        }
    }
}

/// Default shell cutoff for S_Bog^{(R)}: 400π, or 40·√(8πR) when larger.
pub fn default_sbog_cutoff(coupling: f64) -> f64 {
    (400.0 * PI).max(40.0 * (8.0 * PI * coupling).sqrt())
}

/// S_Bog with the default cutoff 400π.
pub fn sum_sbog(cutoff: f64) -> Result<LatticeSumResult> {
    sum_sbog_with(&SbogOptions {
        cutoff,
        ..SbogOptions::default()
    })
}

pub fn sum_sbog_with(opts: &SbogOptions) -> Result<LatticeSumResult> {
    let r = opts.coupling;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("coupling R must be positive"));
    }
    if !(opts.cutoff >= 20.0 * PI) || !opts.cutoff.is_finite() {
        return Err(Error::domain("S_Bog cutoff must be at least 20π"));
    }
    let m_max = shell_index_max(opts.cutoff);
    let p = 2.0 * PI * (m_max as f64).sqrt();
    if p * p < 16.0 * PI * r {
        return Err(Error::domain(format!(
            "S_Bog cutoff {} too small for coupling {r}: need |p|² ≥ 16πR",
            opts.cutoff
        )));
    }
    let counts = shell_counts(m_max);
    let shells = shell_sum(&counts, |m| sbog_summand(4.0 * PI * PI * m as f64, r));
    // |g(ρ)| ≤ 32π³R³(1 + x)/ρ⁴ and |g'(ρ)| ≤ 128π³R³(1 + x)/ρ⁵ for ρ ≥ P
    let x = 8.0 * PI * r / (p * p);
    let k3 = 32.0 * PI.powi(3) * r.powi(3) * (1.0 + x);
    match opts.strategy {
        SumStrategy::PlainShells => {
            let p_lo = p - PI * 2f64.sqrt();
            // (1/2π) ∫_{P−π√2}^∞ k3 ρ^{-3} dρ
            let tail = k3 / (4.0 * PI * p_lo * p_lo);
            Ok(LatticeSumResult {
                value: 0.5 * shells,
                cutoff: p,
                tail_bound: 0.5 * tail,
                strategy: SumStrategy::PlainShells,
            })
        }
        SumStrategy::IntegralTail | SumStrategy::ShellAverage => {
            let tail = sbog_area_tail(p, r);
            let boundary = -sbog_summand(p * p, r) * circle_discrepancy(&counts);
            let c_e = discrepancy_constant(&counts);
            // ½ ∫_P^∞ |g'| C_E (ρ/2π)^{2/3} dρ
            let bound = 0.5 * 4.0 * k3 * c_e * (2.0 * PI).powf(-2.0 / 3.0) * p.powf(-10.0 / 3.0) / (10.0 / 3.0);
            Ok(LatticeSumResult {
                value: 0.5 * (shells + tail + boundary),
                cutoff: p,
                tail_bound: bound,
                strategy: SumStrategy::IntegralTail,
            })
        }
        SumStrategy::Ewald => Err(Error::Config("the Ewald strategy applies to J0 sums only".into())),
    }
}

/// ∂_R S_Bog^{(R)}, differentiated term by term under the same cutoff
/// (integral tail and boundary correction included).
pub fn sum_sbog_d_coupling(opts: &SbogOptions) -> Result<f64> {
    let r = opts.coupling;
    sum_sbog_with(opts)?;
    let m_max = shell_index_max(opts.cutoff);
    let p = 2.0 * PI * (m_max as f64).sqrt();
    let counts = shell_counts(m_max);
    let shells = shell_sum(&counts, |m| sbog_summand_d_coupling(4.0 * PI * PI * m as f64, r));
    if opts.strategy == SumStrategy::PlainShells {
        return Ok(0.5 * shells);
    }
    let tail = sbog_area_tail_d_coupling(p, r);
    let boundary = -sbog_summand_d_coupling(p * p, r) * circle_discrepancy(&counts);
    Ok(0.5 * (shells + tail + boundary))
}

// ---------------------------------------------------------------------------
// Σ J₀(ℓ|p|)/p²

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct J0Options {
    pub strategy: SumStrategy,
    /// Shell cutoff for the shell strategies; default max(400π, 40π/ℓ).
    pub cutoff: Option<f64>,
    /// Trapezoid points on the circle |x| = ℓ (Ewald).
    pub circle_points: usize,
}

impl Default for J0Options {
    fn default() -> Self {
        Self {
            strategy: SumStrategy::Ewald,
            cutoff: None,
            circle_points: 256,
        }
    }
}

pub fn sum_j0(ell: f64, opts: &J0Options) -> Result<LatticeSumResult> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::domain("the J0 sum needs ℓ > 0 (it diverges logarithmically at ℓ = 0)"));
    }
    let cutoff = opts.cutoff.unwrap_or((400.0 * PI).max(40.0 * PI / ell));
    match opts.strategy {
        SumStrategy::Ewald => Ok(j0_ewald(ell, opts.circle_points.max(16))),
        SumStrategy::PlainShells => j0_plain(ell, cutoff),
        SumStrategy::IntegralTail => j0_integral_tail(ell, cutoff, false),
        SumStrategy::ShellAverage => j0_integral_tail(ell, cutoff, true),
    }
}

fn j0_term(ell: f64, m: u64) -> f64 {
    let p_sq = 4.0 * PI * PI * m as f64;
    j0(ell * p_sq.sqrt()) / p_sq
}

fn check_shell_cutoff(cutoff: f64) -> Result<u64> {
    if !(cutoff >= 20.0 * PI) || !cutoff.is_finite() {
        return Err(Error::domain("shell cutoff must be at least 20π"));
    }
    let m = shell_index_max(cutoff);
    if m > 400_000_000 {
        return Err(Error::domain("shell cutoff exceeds the enumeration budget"));
    }
    Ok(m)
}

fn j0_plain(ell: f64, cutoff: f64) -> Result<LatticeSumResult> {
    let m_max = check_shell_cutoff(cutoff)?;
    let counts = shell_counts(m_max);
    let value = shell_sum(&counts, |m| j0_term(ell, m));
    let p = 2.0 * PI * (m_max as f64).sqrt();
    let p_lo = p - PI * 2f64.sqrt();
    // (1/2π) ∫_{P−π√2}^∞ √(2/(πℓρ)) ρ^{-1} dρ = (1/2π)·2√(2/(πℓ))·(P−π√2)^{-1/2}
    let tail = if ell * p_lo > 2.0 / PI {
        (2.0 / (PI * ell)).sqrt() / (PI * p_lo.sqrt())
    } else {
        f64::INFINITY
    };
    Ok(LatticeSumResult {
        value,
        cutoff: p,
        tail_bound: tail,
        strategy: SumStrategy::PlainShells,
    })
}

/// ∫_x^∞ J₀(t)/t dt = −γ − log(x/2) + ∫_0^x (1 − J₀(t))/t dt.
pub fn j0_over_t_tail(x: f64) -> f64 {
    let panels = (x / 2.0).ceil().max(1.0) as usize;
    let inner = composite(gl20(), 0.0, x, panels, |t| {
        if t < 1e-4 {
            t / 4.0 - t * t * t / 64.0
        } else {
            (1.0 - j0(t)) / t
        }
    });
    -EULER_GAMMA - (x / 2.0).ln() + inner
}

fn j0_integral_tail(ell: f64, cutoff: f64, average: bool) -> Result<LatticeSumResult> {
    let m_max = check_shell_cutoff(cutoff)?;
    // half a period of J₀(ℓ|p|) in |p| is π/ℓ, i.e. 1/(2ℓ) in lattice units
    let m_top = if average {
        let rho = (m_max as f64).sqrt() + 0.5 / ell;
        (rho * rho).floor() as u64
    } else {
        m_max
    };
    let counts = shell_counts(m_top);
    let value_at = |m_cut: u64, partial: f64, points: u64| {
        let p = 2.0 * PI * (m_cut as f64).sqrt();
        let tail = j0_over_t_tail(ell * p) / (2.0 * PI);
        let e = points as f64 - PI * m_cut as f64;
        partial + tail - j0(ell * p) / (p * p) * e
    };
    let head = shell_sum(&counts[..=m_max as usize], |m| j0_term(ell, m));
    let mut points: u64 = 1 + counts[..=m_max as usize].iter().map(|&c| c as u64).sum::<u64>();
    let mut value = value_at(m_max, head, points);
    if average {
        let mut partial = CompensatedSum::<f64>::new();
        partial.add(head);
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(value);
        let mut n = 1.0;
        for m in (m_max + 1)..=m_top {
            let c = counts[m as usize];
            if c == 0 {
                continue;
            }
            partial.add(c as f64 * j0_term(ell, m));
            points += c as u64;
            acc.add(value_at(m, partial.value(), points));
            n += 1.0;
        }
        value = acc.value() / n;
    }
    let p = 2.0 * PI * (m_max as f64).sqrt();
    let c_e = discrepancy_constant(&counts[..=m_max as usize]);
    // |g'| ≤ ℓ env(ℓρ)/ρ² + 2 env(ℓρ)/ρ³, env ≤ √(2/(πℓρ)) beyond 2/(πℓ)
    let bound = if ell * p > 2.0 / PI {
        let a = (2.0 / (PI * ell)).sqrt();
        let scale = c_e * (2.0 * PI).powf(-2.0 / 3.0);
        // ∫_P^∞ (ℓ a ρ^{-5/2} + 2a ρ^{-7/2}) ρ^{2/3} dρ
        scale * (ell * a * p.powf(-5.0 / 6.0) / (5.0 / 6.0) + 2.0 * a * p.powf(-11.0 / 6.0) / (11.0 / 6.0))
    } else {
        f64::INFINITY
    };
    Ok(LatticeSumResult {
        value,
        cutoff: p,
        tail_bound: bound,
        strategy: if average {
            SumStrategy::ShellAverage
        } else {
            SumStrategy::IntegralTail
        },
    })
}

/// Heat-kernel split with t = 1/(4π):
///
/// ```text
///   Σ_{p≠0} J₀(ℓp)/p² = Σ_{p≠0} J₀(ℓp) e^{−tp²}/p²
///                      + (1/4π) Σ_{n∈ℤ²} ⟨E₁(π|ℓe_θ − n|²)⟩_θ − t,
/// ```
///
/// where ⟨·⟩_θ averages over the circle of radius ℓ. The logarithmic part of
/// E₁ is averaged exactly (⟨log|ℓe_θ − n|⟩ = log max(ℓ, |n|)), the entire
/// remainder by the trapezoid rule.
fn j0_ewald(ell: f64, k: usize) -> LatticeSumResult {
    const RECIPROCAL_SHELLS: u64 = 64;
    const IMAGE_MARGIN: f64 = 8.0;
    let t = 1.0 / (4.0 * PI);
    let counts = shell_counts(RECIPROCAL_SHELLS);
    let recip = compensated_sum((1..=RECIPROCAL_SHELLS).filter(|&m| counts[m as usize] > 0).map(|m| {
        let p_sq = 4.0 * PI * PI * m as f64;
        counts[m as usize] as f64 * j0(ell * p_sq.sqrt()) * (-t * p_sq).exp() / p_sq
    }));

    let n_max = (ell + IMAGE_MARGIN).ceil() as i64;
    let images: Vec<(f64, f64)> = (-n_max..=n_max)
        .flat_map(|i| (-n_max..=n_max).map(move |j| (i as f64, j as f64)))
        .filter(|&(i, j)| (i * i + j * j).sqrt() <= ell + IMAGE_MARGIN)
        .collect();
    let circle = |k: usize| -> Vec<(f64, f64)> {
        (0..k)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / k as f64;
                (ell * th.cos(), ell * th.sin())
            })
            .collect()
    };
    let fine = circle(k);
    let coarse = circle(k / 2);
    let average = |pts: &[(f64, f64)], (i, j): (f64, f64)| {
        compensated_sum(pts.iter().map(|&(x, y)| e1_plus_log(PI * ((x - i).powi(2) + (y - j).powi(2))))) / pts.len() as f64
    };
    let per_image: Vec<(f64, f64)> = images
        .par_iter()
        .map(|&n| {
            let log_part = PI.ln() + 2.0 * ell.max((n.0 * n.0 + n.1 * n.1).sqrt()).ln();
            (average(&fine, n) - log_part, average(&coarse, n) - log_part)
        })
        .collect();
    let real_fine = compensated_sum(per_image.iter().map(|v| v.0));
    let real_coarse = compensated_sum(per_image.iter().map(|v| v.1));
    let value = recip + real_fine / (4.0 * PI) - t;

    // truncation: reciprocal Σ_{m>64} r₂(m) e^{−πm}/(4π²m), images with
    // distance ≥ 8 from the circle: Σ e^{−πd²}; both below 1e-80
    let truncation = 1e-80;
    let quadrature = (real_fine - real_coarse).abs() / (4.0 * PI);
    let rounding = 64.0 * f64::EPSILON * (recip.abs() + real_fine.abs() / (4.0 * PI) + t);
    LatticeSumResult {
        value,
        cutoff: 2.0 * PI * (RECIPROCAL_SHELLS as f64).sqrt(),
        tail_bound: truncation + quadrature + rounding,
        strategy: SumStrategy::Ewald,
    }
}

/// I_ℓ = −2π log(ℓ/𝔞) + π²ℓ² − 4π² Σ J₀(ℓ|p|)/p² with its tail bound.
/// Independent of ℓ for 0 < ℓ ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IEll {
    pub ell: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub j0_sum: LatticeSumResult,
}

pub fn i_ell(ell: f64, a: f64, opts: &J0Options) -> Result<IEll> {
    if !(a > 0.0) {
        return Err(Error::domain("scattering length must be positive"));
    }
    let s = sum_j0(ell, opts)?;
    Ok(IEll {
        ell,
        value: -2.0 * PI * (ell / a).ln() + PI * PI * ell * ell - 4.0 * PI * PI * s.value,
        tail_bound: 4.0 * PI * PI * s.tail_bound,
        j0_sum: s,
    })
}

// ---------------------------------------------------------------------------
// Energies

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyOptions {
    pub sbog_cutoff: Option<f64>,
    pub j0: J0Options,
    /// Maximal admissible combined tail bound.
    pub max_tail: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            sbog_cutoff: None,
            j0: J0Options::default(),
            max_tail: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCutoffs {
    pub s_bog: f64,
    pub j0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub n: u64,
    pub a: f64,
    /// 2π(N−1) + π²𝔞² + S_Bog − 4π² Σ J₀(|p|𝔞)/p².
    #[serde(rename = "E")]
    pub e: f64,
    /// 2π(N−1) + 2π log 𝔞 + π² + S_Bog − 4π² Σ J₀(|p|)/p².
    #[serde(rename = "E_unit_ell")]
    pub e_unit_ell: f64,
    pub form_difference: f64,
    /// Tail bound of the difference of the two forms.
    pub form_tail_bound: f64,
    #[serde(rename = "S_bog")]
    pub s_bog: LatticeSumResult,
    pub j0_sum: LatticeSumResult,
    pub j0_sum_unit: LatticeSumResult,
    /// Combined tail bound of `E`.
    pub tail_bound: f64,
    pub cutoffs: EnergyCutoffs,
}

pub fn energy_en(n: u64, a: f64, opts: &EnergyOptions) -> Result<EnergyReport> {
    if n < 2 {
        return Err(Error::domain("N must be at least 2"));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("scattering length must be positive"));
    }
    let s_bog = sum_sbog(opts.sbog_cutoff.unwrap_or(400.0 * PI))?;
    let j0a = sum_j0(a, &opts.j0)?;
    let j01 = sum_j0(1.0, &opts.j0)?;
    let base = 2.0 * PI * (n - 1) as f64;
    let e = base + PI * PI * a * a + s_bog.value - 4.0 * PI * PI * j0a.value;
    let e_unit = base + 2.0 * PI * a.ln() + PI * PI + s_bog.value - 4.0 * PI * PI * j01.value;
    let tail = s_bog.tail_bound + 4.0 * PI * PI * j0a.tail_bound;
    if tail > opts.max_tail {
        return Err(Error::TailTooLarge {
            tail,
            tol: opts.max_tail,
        });
    }
    Ok(EnergyReport {
        n,
        a,
        e,
        e_unit_ell: e_unit,
        form_difference: e - e_unit,
        form_tail_bound: 4.0 * PI * PI * (j0a.tail_bound + j01.tail_bound),
        s_bog,
        j0_sum: j0a,
        j0_sum_unit: j01,
        tail_bound: tail,
        cutoffs: EnergyCutoffs {
            s_bog: s_bog.cutoff,
            j0: j0a.cutoff,
        },
    })
}

/// Leading order 4πN²/|log(N e^{−2N} 𝔞²)|.
pub fn energy_leading_order(n: u64, a: f64) -> f64 {
    let nf = n as f64;
    4.0 * PI * nf * nf / (2.0 * nf - nf.ln() - 2.0 * a.ln()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRReport {
    pub coupling: f64,
    pub n: u64,
    pub a: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "S_bog")]
    pub s_bog: LatticeSumResult,
    pub j0_sum: LatticeSumResult,
    pub tail_bound: f64,
    /// 2πRN + πR²(½ + 2γ + log(πR𝔞²/2)).
    pub thermodynamic: f64,
    /// |E − thermodynamic|/R².
    pub scaled_defect: f64,
}

/// E_N^{(R)} = 2πR(N−1) + πR² log R + π²𝔞²R + S_Bog^{(R)} − 4π²R² Σ J₀(|p|𝔞/√R)/p².
pub fn energy_enr(coupling: f64, n: u64, a: f64, opts: &EnergyOptions) -> Result<EnergyRReport> {
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::domain("coupling R must be positive"));
    }
    if n < 2 {
        return Err(Error::domain("N must be at least 2"));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("scattering length must be positive"));
    }
    let r = coupling;
    let s_bog = sum_sbog_with(&SbogOptions {
        cutoff: opts.sbog_cutoff.unwrap_or_else(|| default_sbog_cutoff(r)),
        strategy: SumStrategy::IntegralTail,
        coupling: r,
    })?;
    let j0s = sum_j0(a / r.sqrt(), &opts.j0)?;
    let e = 2.0 * PI * r * (n - 1) as f64 + PI * r * r * r.ln() + PI * PI * a * a * r + s_bog.value
        - 4.0 * PI * PI * r * r * j0s.value;
    let tail = s_bog.tail_bound + 4.0 * PI * PI * r * r * j0s.tail_bound;
    let thermo = 2.0 * PI * r * n as f64 + PI * r * r * (0.5 + 2.0 * EULER_GAMMA + (PI * r * a * a / 2.0).ln());
    Ok(EnergyRReport {
        coupling: r,
        n,
        a,
        e,
        s_bog,
        j0_sum: j0s,
        tail_bound: tail,
        thermodynamic: thermo,
        scaled_defect: (e - thermo).abs() / (r * r),
    })
}

/// Analytic ∂_R E_N^{(R)} at fixed S_Bog cutoff.
///
/// With I_ℓ from [`i_ell`] the energy reads 2πR(N−1) + S_Bog^{(R)} + R² I_ℓ
/// at ℓ = 𝔞/√R; since I_ℓ does not depend on ℓ ≤ 1, the derivative is
/// 2π(N−1) + ∂_R S_Bog^{(R)} + 2R I_ℓ (valid for R ≥ 𝔞²).
pub fn energy_enr_d_coupling(coupling: f64, n: u64, a: f64, sbog_cutoff: f64, j0: &J0Options) -> Result<f64> {
    if !(coupling >= a * a) {
        return Err(Error::domain("the analytic derivative needs R ≥ 𝔞²"));
    }
    let ds = sum_sbog_d_coupling(&SbogOptions {
        cutoff: sbog_cutoff,
        strategy: SumStrategy::IntegralTail,
        coupling,
    })?;
    let i = i_ell(a / coupling.sqrt(), a, j0)?;
    Ok(2.0 * PI * (n - 1) as f64 + ds + 2.0 * coupling * i.value)
}

/// Second-order thermodynamic energy per particle
/// e(ρ) = 4πρb(1 − b|log b| + (½ + 2γ + log π) b), b = |log(ρ𝔞²)|⁻¹.
pub fn thermo_e_rho(rho: f64, a: f64) -> Result<f64> {
    if !(rho > 0.0) || !(a > 0.0) {
        return Err(Error::domain("density and scattering length must be positive"));
    }
    let x = rho * a * a;
    if !(x < 1.0) {
        return Err(Error::domain("need ρ𝔞² < 1"));
    }
    Ok(thermo_from_log(rho, x.ln()))
}

/// e(ρ) with log(ρ𝔞²) supplied directly (no underflow for tiny 𝔞).
pub fn thermo_from_log(rho: f64, log_rho_a2: f64) -> f64 {
    let b = 1.0 / log_rho_a2.abs();
    4.0 * PI * rho * b * (1.0 - b * b.ln().abs() + (0.5 + 2.0 * EULER_GAMMA + PI.ln()) * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoComparison {
    pub n: u64,
    /// N·e(N) with b = (2N − log N − log 𝔞²)⁻¹.
    pub thermodynamic: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub difference: f64,
    pub relative_difference: f64,
}

/// Compares N·e(ρ = N) in the scaled regime (scattering length e^{−N}𝔞) with E_N.
pub fn thermo_gp_comparison(n: u64, a: f64, opts: &EnergyOptions) -> Result<ThermoComparison> {
    let en = energy_en(n, a, opts)?;
    let nf = n as f64;
    let thermo = nf * thermo_from_log(nf, nf.ln() - 2.0 * nf + 2.0 * a.ln());
    Ok(ThermoComparison {
        n,
        thermodynamic: thermo,
        e: en.e,
        difference: thermo - en.e,
        relative_difference: (thermo - en.e) / en.e,
    })
}

// ---------------------------------------------------------------------------
// Excitation ladder

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub j: i64,
    pub k: i64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub value: f64,
    pub degeneracy: usize,
    /// One label per occupation configuration, e.g. "(1,0)^2 (0,-1)".
    pub labels: Vec<String>,
}

/// Lattice modes p = 2π(j, k) ≠ 0 with ε(p) ≤ ζ, sorted by energy (ties by
/// (j, k)).
pub fn modes_below(zeta: f64, coupling: f64) -> Vec<Mode> {
    let slack = zeta * (1.0 + 1e-12);
    let mut modes = Vec::new();
    let mut m: u64 = 1;
    while dispersion(4.0 * PI * PI * m as f64, coupling) <= slack {
        m += 1;
    }
    let j_max = (m as f64).sqrt().ceil() as i64;
    for j in -j_max..=j_max {
        for k in -j_max..=j_max {
            if j == 0 && k == 0 {
                continue;
            }
            let e = dispersion(4.0 * PI * PI * (j * j + k * k) as f64, coupling);
            if e <= slack {
                modes.push(Mode { j, k, energy: e });
            }
        }
    }
    modes.sort_by(|a, b| a.energy.total_cmp(&b.energy).then((a.j, a.k).cmp(&(b.j, b.k))));
    modes
}

/// A bosonic mode of the excitation ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderMode {
    pub label: String,
    pub energy: f64,
}

impl From<&Mode> for LadderMode {
    fn from(m: &Mode) -> Self {
        Self {
            label: format!("({},{})", m.j, m.k),
            energy: m.energy,
        }
    }
}

fn occupation_energy(modes: &[LadderMode], occ: &[(usize, u32)]) -> f64 {
    occ.iter().fold(0.0, |acc, &(i, n)| acc + n as f64 * modes[i].energy)
}

fn label(modes: &[LadderMode], occ: &[(usize, u32)]) -> String {
    if occ.is_empty() {
        return "vacuum".to_string();
    }
    occ.iter()
        .map(|&(i, n)| {
            if n == 1 {
                modes[i].label.clone()
            } else {
                format!("{}^{}", modes[i].label, n)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn group_levels(mut states: Vec<(f64, String)>) -> Vec<SpectrumLevel> {
    states.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut levels: Vec<SpectrumLevel> = Vec::new();
    for (v, l) in states {
        match levels.last_mut() {
            Some(last) if (v - last.value).abs() <= 1e-10 * last.value.max(1.0) => {
                last.degeneracy += 1;
                last.labels.push(l);
            }
            _ => levels.push(SpectrumLevel {
                value: v,
                degeneracy: 1,
                labels: vec![l],
            }),
        }
    }
    for l in &mut levels {
        l.labels.sort();
    }
    levels
}

/// All values Σ n_i e_i ≤ ζ over occupations of the given modes, grouped
/// into levels. Modes are visited in increasing energy, so a branch stops as
/// soon as the cheapest remaining mode no longer fits. Fails if more than
/// `max_states` configurations qualify.
pub fn ladder(modes: &[LadderMode], zeta: f64, max_states: usize) -> Result<Vec<SpectrumLevel>> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::domain("ζ must be nonnegative and finite"));
    }
    if modes.iter().any(|m| !(m.energy > 0.0)) {
        return Err(Error::domain("ladder modes need positive energies"));
    }
    let mut modes = modes.to_vec();
    modes.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let slack = zeta * (1.0 + 1e-12);
    let mut states: Vec<(f64, String)> = Vec::new();
    let mut occ: Vec<(usize, u32)> = Vec::new();

    fn walk(
        modes: &[LadderMode],
        start: usize,
        used: f64,
        slack: f64,
        occ: &mut Vec<(usize, u32)>,
        states: &mut Vec<(f64, String)>,
        max_states: usize,
    ) -> Result<()> {
        if states.len() >= max_states {
            return Err(Error::DimensionBudget {
                nonzeros: states.len(),
                budget: max_states,
            });
        }
        states.push((occupation_energy(modes, occ), label(modes, occ)));
        for i in start..modes.len() {
            let e = modes[i].energy;
            if used + e > slack {
                break;
            }
            let mut n = 1u32;
            while used + n as f64 * e <= slack {
                occ.push((i, n));
                walk(modes, i + 1, used + n as f64 * e, slack, occ, states, max_states)?;
                occ.pop();
                n += 1;
            }
        }
        Ok(())
    }
    walk(&modes, 0, 0.0, slack, &mut occ, &mut states, max_states)?;
    Ok(group_levels(states))
}

/// All excitation energies Σ n_p ε(p) ≤ ζ over lattice modes, with
/// degeneracies.
pub fn spectrum_enumerate(zeta: f64, max_states: usize) -> Result<Vec<SpectrumLevel>> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::domain("ζ must be positive"));
    }
    let modes: Vec<LadderMode> = modes_below(zeta, 1.0).iter().map(LadderMode::from).collect();
    ladder(&modes, zeta, max_states)
}

/// Independent oracle for [`spectrum_enumerate`]: runs over the full box of
/// occupation vectors 0 ≤ n_p ≤ ⌊ζ/ε(p)⌋ and keeps those with Σ n_p ε(p) ≤ ζ.
pub fn spectrum_bruteforce(zeta: f64, max_box: u64) -> Result<Vec<SpectrumLevel>> {
    if !(zeta > 0.0) {
        return Err(Error::domain("ζ must be positive"));
    }
    let modes: Vec<LadderMode> = modes_below(zeta, 1.0).iter().map(LadderMode::from).collect();
    let slack = zeta * (1.0 + 1e-12);
    let caps: Vec<u32> = modes.iter().map(|m| (slack / m.energy).floor() as u32).collect();
    let size = caps.iter().try_fold(1u64, |acc, &c| acc.checked_mul(c as u64 + 1));
    match size {
        Some(s) if s <= max_box => {}
        _ => {
            return Err(Error::DimensionBudget {
                nonzeros: usize::MAX,
                budget: max_box as usize,
            })
        }
    }
    let mut states = Vec::new();
    let mut n = vec![0u32; modes.len()];
    loop {
        let total: f64 = n.iter().zip(&modes).map(|(&c, m)| c as f64 * m.energy).sum();
        if total <= slack {
            let occ: Vec<(usize, u32)> = n.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect();
            states.push((occupation_energy(&modes, &occ), label(&modes, &occ)));
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n.len() {
                return Ok(group_levels(states));
            }
            if n[i] < caps[i] {
                n[i] += 1;
                break;
            }
            n[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shells_up_to_two() {
        let s = shell_enumerate(2.0 * PI * 2f64.sqrt()).unwrap();
        assert_eq!(s.iter().map(|s| (s.m, s.multiplicity)).collect::<Vec<_>>(), vec![(1, 4), (2, 4)]);
        let s = shell_enumerate(2.0 * PI * 3f64.sqrt()).unwrap();
        assert!(s.iter().all(|s| s.m != 3));
        assert!(shell_enumerate(0.0).is_err());
    }

    #[test]
    fn shell_counts_match_brute_force() {
        let m_max = 500u64;
        let counts = shell_counts(m_max);
        let mut brute = vec![0u32; m_max as usize + 1];
        for j in -25i64..=25 {
            for k in -25i64..=25 {
                let m = (j * j + k * k) as u64;
                if m > 0 && m <= m_max {
                    brute[m as usize] += 1;
                }
            }
        }
        assert_eq!(counts, brute);
    }

    #[test]
    fn sbog_summand_is_stable() {
        let p2 = 4.0 * PI * PI;
        let direct = dispersion(p2, 1.0) - p2 - 4.0 * PI + 8.0 * PI * PI / p2;
        assert_relative_eq!(sbog_summand(p2, 1.0), direct, max_relative = 1e-12);
        assert!((sbog_summand(p2, 1.0) - 0.460).abs() < 1e-3);
        let r1 = sbog_summand(1e6, 1.0);
        let r2 = sbog_summand(4e6, 1.0);
        let exponent = (r2 / r1).ln() / 2f64.ln() / 2.0;
        assert!((exponent + 2.0).abs() < 0.05, "p-exponent {}", 2.0 * exponent);
    }

    #[test]
    fn sbog_derivative_matches_difference() {
        let h = 1e-5;
        for p2 in [40.0, 1e3, 1e5] {
            let fd = (sbog_summand(p2, 1.0 + h) - sbog_summand(p2, 1.0 - h)) / (2.0 * h);
            assert_relative_eq!(sbog_summand_d_coupling(p2, 1.0), fd, max_relative = 1e-7);
        }
    }

    #[test]
    fn sbog_cutoff_doubling() {
        let a = sum_sbog(200.0 * PI).unwrap();
        let b = sum_sbog(400.0 * PI).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{} vs {}", a.value, b.value);
        assert!((a.value - b.value).abs() <= a.tail_bound);
        // shell sums to m = 2.56e6 with the same tail give 1.49497429024204
        assert!((b.value - 1.49497429024204).abs() < 1e-10);
        let plain = sum_sbog_with(&SbogOptions {
            cutoff: 400.0 * PI,
            strategy: SumStrategy::PlainShells,
            coupling: 1.0,
        })
        .unwrap();
        assert!((plain.value - b.value).abs() <= plain.tail_bound);
        assert!(sum_sbog(10.0).is_err());
    }

    #[test]
    fn ewald_j0_is_ell_independent() {
        let opts = J0Options::default();
        let i1 = i_ell(0.05, 1.0, &opts).unwrap();
        for ell in [0.1, 0.2, 0.5, 1.0] {
            let i = i_ell(ell, 1.0, &opts).unwrap();
            assert!((i.value - i1.value).abs() < 1e-11, "ℓ = {ell}: {} vs {}", i.value, i1.value);
            assert!(i.tail_bound < 1e-9);
        }
        assert_relative_eq!(i1.value, 8.234321224662, max_relative = 1e-11);
        assert!(sum_j0(0.0, &opts).is_err());
    }

    #[test]
    fn shell_strategies_agree_with_ewald_within_bounds() {
        let ell = 0.2;
        let ewald = sum_j0(ell, &J0Options::default()).unwrap();
        for strategy in [SumStrategy::IntegralTail, SumStrategy::ShellAverage, SumStrategy::PlainShells] {
            let r = sum_j0(
                ell,
                &J0Options {
                    strategy,
                    ..J0Options::default()
                },
            )
            .unwrap();
            assert!(
                (r.value - ewald.value).abs() <= r.tail_bound,
                "{strategy:?}: {} vs {} (bound {})",
                r.value,
                ewald.value,
                r.tail_bound
            );
        }
    }

    #[test]
    fn j0_tail_integral() {
        // reference by oscillatory quadrature at 30 digits
        assert_relative_eq!(j0_over_t_tail(1.0), 0.23709676265348115, max_relative = 1e-12);
    }

    #[test]
    fn energy_forms_agree() {
        for a in [0.05, 0.1, 0.3] {
            let e = energy_en(10, a, &EnergyOptions::default()).unwrap();
            assert!(e.form_difference.abs() <= e.form_tail_bound);
            assert!(e.form_tail_bound <= 1e-5);
        }
        let e9 = energy_en(9, 0.1, &EnergyOptions::default()).unwrap();
        let e10 = energy_en(10, 0.1, &EnergyOptions::default()).unwrap();
        assert_relative_eq!(e10.e - e9.e, 2.0 * PI, max_relative = 1e-12);
        assert!(energy_en(1, 0.1, &EnergyOptions::default()).is_err());
    }

    #[test]
    fn coupling_one_reduces_to_en() {
        let en = energy_en(7, 0.1, &EnergyOptions::default()).unwrap();
        let enr = energy_enr(1.0, 7, 0.1, &EnergyOptions::default()).unwrap();
        assert!((en.e - enr.e).abs() < 1e-10);
    }

    #[test]
    fn thermo_definitions() {
        let b: f64 = 1.0 / (1e-6f64).ln().abs();
        let e = thermo_e_rho(1.0, 1e-3).unwrap();
        let expected = 4.0 * PI * b * (1.0 - b * b.ln().abs() + (0.5 + 2.0 * EULER_GAMMA + PI.ln()) * b);
        assert_relative_eq!(e, expected, max_relative = 1e-14);
        assert!(thermo_e_rho(1.0, 1.0).is_err());
        let small = thermo_e_rho(1e-200, 1.0).unwrap();
        let b = 1.0 / 460.517_018_598_809_1;
        assert!((small / (4.0 * PI * 1e-200 * b) - 1.0).abs() < 0.02);
    }

    #[test]
    fn ladder_small_cases() {
        let e1 = dispersion(4.0 * PI * PI, 1.0);
        let levels = spectrum_enumerate(0.5 * e1, 1000).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].value, 0.0);
        let levels = spectrum_enumerate(1.01 * e1, 1000).unwrap();
        assert_eq!(levels[1].degeneracy, 4);
        assert!((levels[1].value - (16.0 * PI.powi(4) + 32.0 * PI.powi(3)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ladder_matches_bruteforce() {
        let e1 = dispersion(4.0 * PI * PI, 1.0);
        let a = spectrum_enumerate(3.0 * e1, 100_000).unwrap();
        let b = spectrum_bruteforce(3.0 * e1, 10_000_000).unwrap();
        assert_eq!(a, b);
        let degs: Vec<usize> = a.iter().map(|l| l.degeneracy).collect();
        assert_eq!(degs, vec![1, 4, 4, 10, 16, 20]);
    }
}
