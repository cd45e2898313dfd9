//! Renormalized coefficients on the momentum lattice.
//!
//! For N particles and ℓ = N^{−α} the Neumann problem is solved once, on the
//! disk of radius R = e^N ℓ. Everything else follows by scaling:
//!
//! ```text
//!     η_p    = −N e^{−2N} ŵ_R(p/e^N),          e^{−N} = ℓ/R,
//!     g_N    = 2N λ_R R²,
//!     ω̂_N(p) = g_N χ̂(ℓp),                      χ̂(q) = 2π J₁(|q|)/|q|,
//!     F_p    = p² + ω̂_N(p),   G_p = ω̂_N(p),
//! ```
//!
//! with ŵ_R the 2D Fourier transform of w_R = 1 − f_R. Only R and the
//! dimensionless ε² = λR² are ever formed; e^N itself is never materialized.
//! Coefficients are radial, so tables hold one row per shell m = |p/2π|².

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bogoliubov::{cp_coefficients, dispersion, pair_frequency};
use crate::error::{Error, Result};
use crate::lattice::{shell_counts, shell_enumerate, shell_index_max};
use crate::potentials::{Potential, PotentialKind};
use crate::quadrature::adaptive;
use crate::scattering::{solve_neumann, NeumannOptions, ScatteringSolution};
use crate::special::disk_hat;
use crate::summation::{compensated_sum, CompensatedSum};

/// Tabulation cutoff used when none is given and N^{α+ν} is larger.
pub const DEFAULT_P_MAX: f64 = 64.0 * PI;

/// Largest disk radius e^N ℓ accepted by default.
pub const DEFAULT_RADIUS_BUDGET: f64 = 1e9;

// sup_x √x |J₁(x)| ≤ √(2/π); the J₀ envelope gets a little slack because
// √x |J₀(x)| approaches √(2/π) from above.
const J1_ENVELOPE: f64 = 0.797_884_560_802_865_4;
const J0_ENVELOPE: f64 = 0.81;

/// F_p^γ = (1 − c N^{−γ}) p² + ω̂_N(p), used only for υ_p. `c = 0` gives F_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deformation {
    pub c: f64,
    pub gamma: f64,
}

impl Default for Deformation {
    fn default() -> Self {
        Self { c: 0.0, gamma: 0.125 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GPParams {
    pub n: u64,
    pub alpha: f64,
    pub nu: f64,
    /// Tabulation cutoff on |p|. `None` means min(N^{α+ν}, 64π).
    pub p_max: Option<f64>,
    pub deformation: Deformation,
    pub radius_budget: f64,
}

impl GPParams {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            alpha: 2.5,
            nu: 0.2,
            p_max: None,
            deformation: Deformation::default(),
            radius_budget: DEFAULT_RADIUS_BUDGET,
        }
    }

    pub fn with_p_max(mut self, p_max: f64) -> Self {
        self.p_max = Some(p_max);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {}", self.n)));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(Error::domain(format!("nu must lie in (0, 1/2), got {}", self.nu)));
        }
        if !(self.ell() < 0.5) {
            return Err(Error::domain(format!("l = N^-alpha = {} must be below 1/2", self.ell())));
        }
        if let Some(p) = self.p_max {
            if !(p >= 2.0 * PI) || !p.is_finite() {
                return Err(Error::domain(format!("p_max must be at least 2 pi, got {p}")));
            }
        }
        let d = self.deformation;
        if !(d.c >= 0.0) || !(d.gamma > 0.0 && d.gamma < 0.25) {
            return Err(Error::domain("deformation needs c >= 0 and gamma in (0, 1/4)"));
        }
        if !(self.deformation_factor() > 0.0) {
            return Err(Error::domain("deformation factor 1 - c N^-gamma must be positive"));
        }
        if !(self.radius_budget > 0.0) {
            return Err(Error::domain("radius budget must be positive"));
        }
        Ok(())
    }

    /// ℓ = N^{−α}.
    pub fn ell(&self) -> f64 {
        (self.n as f64).powf(-self.alpha)
    }

    /// log R = N − α log N.
    pub fn log_radius(&self) -> f64 {
        let n = self.n as f64;
        n - self.alpha * n.ln()
    }

    pub fn radius(&self) -> f64 {
        self.log_radius().exp()
    }

    /// N^{α+ν}, the cutoff of the low-momentum set in the proofs.
    pub fn proof_cutoff(&self) -> f64 {
        (self.n as f64).powf(self.alpha + self.nu)
    }

    pub fn cutoff(&self) -> f64 {
        self.p_max.unwrap_or_else(|| self.proof_cutoff().min(DEFAULT_P_MAX))
    }

    fn deformation_factor(&self) -> f64 {
        1.0 - self.deformation.c * (self.n as f64).powf(-self.deformation.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellCoefficients {
    pub m: u64,
    pub p_sq: f64,
    pub multiplicity: u32,
    pub eta: f64,
    pub omega_hat: f64,
    pub f: f64,
    pub g: f64,
    pub tau: f64,
    pub upsilon: f64,
    /// α_p = tanh(2υ_p).
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    pub params: GPParams,
    pub ell: f64,
    pub radius: f64,
    pub cutoff: f64,
    pub proof_cutoff: f64,
    pub g_n: f64,
    pub lambda: f64,
    pub eps_sq: f64,
    pub int_vf: f64,
    pub scattering_length: Option<f64>,
    pub eta0: f64,
    pub omega_hat0: f64,
    pub shells: Vec<ShellCoefficients>,
    #[serde(skip)]
    pub solution: ScatteringSolution,
    #[serde(skip)]
    pub potential: Potential,
}

impl CoefficientTable {
    /// |p| ↦ k = |p| ℓ/R, the momentum seen by the unscaled profile.
    pub fn scaled_momentum(&self, p_norm: f64) -> f64 {
        p_norm * self.ell / self.radius
    }

    /// η at any momentum (not only tabulated shells).
    pub fn eta_at(&self, p_norm: f64) -> f64 {
        if self.potential.is_zero() {
            return 0.0;
        }
        let k = self.scaled_momentum(p_norm);
        -self.eta_scale() * self.solution.hankel_w(&self.potential, k)
    }

    pub fn omega_hat_at(&self, p_norm: f64) -> f64 {
        self.g_n * disk_hat(self.ell * p_norm)
    }

    pub fn shell(&self, m: u64) -> Option<&ShellCoefficients> {
        self.shells.binary_search_by_key(&m, |s| s.m).ok().map(|i| &self.shells[i])
    }

    // η_p = −2πN (ℓ/R)² ∫₀^R w J₀(kr) r dr
    fn eta_scale(&self) -> f64 {
        2.0 * PI * self.params.n as f64 * (self.ell / self.radius).powi(2)
    }
}

/// τ with tanh(2τ) = −G/F, and υ with tanh(2υ) = α = (F − √(F² − G²))/G.
pub fn tau_upsilon(f: f64, g: f64) -> Result<(f64, f64)> {
    let cp = cp_coefficients(f, g)?;
    Ok((tau(f, g), cp.alpha.atanh() / 2.0))
}

// ¼ log((F − G)/(F + G)) = ¼ log1p(−2G/(F + G))
fn tau(f: f64, g: f64) -> f64 {
    0.25 * (-2.0 * g / (f + g)).ln_1p()
}

pub fn build_table(pot: &Potential, params: &GPParams) -> Result<CoefficientTable> {
    build_table_with(pot, params, &NeumannOptions::default())
}

pub fn build_table_with(pot: &Potential, params: &GPParams, opts: &NeumannOptions) -> Result<CoefficientTable> {
    params.validate()?;
    let radius = params.radius();
    if radius > params.radius_budget {
        return Err(Error::RadiusTooLarge {
            radius,
            budget: params.radius_budget,
        });
    }
    if !(radius > pot.range()) {
        return Err(Error::domain(format!(
            "disk radius e^N l = {radius} does not exceed the potential range {}",
            pot.range()
        )));
    }
    let solution = solve_neumann(pot, radius, opts)?;
    let n = params.n as f64;
    let ell = params.ell();
    let cutoff = params.cutoff();
    let g_n = 2.0 * n * solution.eps_sq;
    let mut table = CoefficientTable {
        params: *params,
        ell,
        radius,
        cutoff,
        proof_cutoff: params.proof_cutoff(),
        g_n,
        lambda: solution.lambda,
        eps_sq: solution.eps_sq,
        int_vf: solution.int_vf,
        scattering_length: solution.scattering_length,
        eta0: 0.0,
        omega_hat0: PI * g_n,
        shells: Vec::new(),
        solution,
        potential: pot.clone(),
    };
    table.eta0 = table.eta_at(0.0);
    let shape = params.deformation_factor();
    let shells = shell_enumerate(cutoff)?
        .into_par_iter()
        .map(|s| {
            let p = s.p_sq.sqrt();
            let eta = table.eta_at(p);
            let omega_hat = table.omega_hat_at(p);
            let (f, g) = (s.p_sq + omega_hat, omega_hat);
            if !(g.abs() < f) {
                return Err(Error::BoundViolation {
                    p_sq: s.p_sq,
                    what: format!("|G_p| = {} is not below F_p = {f}", g.abs()),
                });
            }
            let f_gamma = shape * s.p_sq + omega_hat;
            let alpha = cp_coefficients(f_gamma, g)
                .map_err(|_| Error::BoundViolation {
                    p_sq: s.p_sq,
                    what: format!("|G_p| = {} is not below F_p^gamma = {f_gamma}", g.abs()),
                })?
                .alpha;
            Ok(ShellCoefficients {
                m: s.m,
                p_sq: s.p_sq,
                multiplicity: s.multiplicity,
                eta,
                omega_hat,
                f,
                g,
                tau: tau(f, g),
                upsilon: alpha.atanh() / 2.0,
                alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    table.shells = shells;
    Ok(table)
}

/// Empirical constants and violation counts for the pointwise bounds on the
/// tabulated shells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaBoundsReport {
    pub shells: usize,
    /// Shells with F_p < p²/2.
    pub lower_violations: usize,
    /// Shells with |G_p| ≥ F_p.
    pub gap_violations: usize,
    /// Shells with ℓ|p| ≤ 1 and ω̂_N(p) < 0.
    pub sign_violations: usize,
    /// sup F_p/(1 + p²).
    pub f_upper_constant: f64,
    /// sup |G_p|·(1 + ℓ|p|)^{3/2}.
    pub g_decay_constant: f64,
    /// sup p²|η_p|.
    pub eta_decay_constant: f64,
    /// N ∫Vf, an a-priori bound on p²|η_p| for every p.
    pub eta_decay_bound: f64,
    /// max |tanh(2τ_p) + G_p/F_p|.
    pub tau_defect: f64,
    /// max |tanh(2υ_p) − α_p|.
    pub upsilon_defect: f64,
}

pub fn lemma_bounds(table: &CoefficientTable) -> LemmaBoundsReport {
    let mut r = LemmaBoundsReport {
        shells: table.shells.len(),
        lower_violations: 0,
        gap_violations: 0,
        sign_violations: 0,
        f_upper_constant: 0.0,
        g_decay_constant: 0.0,
        eta_decay_constant: 0.0,
        eta_decay_bound: table.params.n as f64 * table.int_vf,
        tau_defect: 0.0,
        upsilon_defect: 0.0,
    };
    for s in &table.shells {
        let p = s.p_sq.sqrt();
        if s.f < 0.5 * s.p_sq {
            r.lower_violations += 1;
        }
        if !(s.g.abs() < s.f) {
            r.gap_violations += 1;
        }
        if table.ell * p <= 1.0 && s.omega_hat < 0.0 {
            r.sign_violations += 1;
        }
        r.f_upper_constant = r.f_upper_constant.max(s.f / (1.0 + s.p_sq));
        r.g_decay_constant = r.g_decay_constant.max(s.g.abs() * (1.0 + table.ell * p).powf(1.5));
        r.eta_decay_constant = r.eta_decay_constant.max(s.p_sq * s.eta.abs());
        r.tau_defect = r.tau_defect.max(((2.0 * s.tau).tanh() + s.g / s.f).abs());
        r.upsilon_defect = r.upsilon_defect.max(((2.0 * s.upsilon).tanh() - s.alpha).abs());
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    /// ‖η‖²/ℓ² by Parseval, N² e^{−2N} ‖w_R‖²/ℓ².
    pub eta_norm_sq: f64,
    /// Σ over the tabulated lattice (η_0 included) of η_p², divided by ℓ².
    pub eta_norm_sq_truncated: f64,
    /// |η_0|/ℓ².
    pub eta0: f64,
    /// sup |ω̂_N(p)|·max{1, (ℓ|p|)^{3/2}} over the tabulated shells.
    pub omega_decay_constant: f64,
    /// ℓ|p| at the first tabulated shell with ω̂_N(p) < 0.
    pub omega_first_negative: Option<f64>,
}

pub fn norm_checks(table: &CoefficientTable) -> NormReport {
    let ell_sq = table.ell * table.ell;
    let n = table.params.n as f64;
    let w_sq = if table.potential.is_zero() {
        0.0
    } else {
        table.solution.integral_w_sq(&table.potential)
    };
    let parseval = n * n * (table.ell / table.radius).powi(2) * 2.0 * PI * w_sq;
    let mut acc = CompensatedSum::new();
    acc.add(table.eta0 * table.eta0);
    let mut omega_decay: f64 = table.omega_hat0.abs();
    let mut first_negative = None;
    for s in &table.shells {
        acc.add(s.multiplicity as f64 * s.eta * s.eta);
        let x = table.ell * s.p_sq.sqrt();
        omega_decay = omega_decay.max(s.omega_hat.abs() * x.powf(1.5).max(1.0));
        if first_negative.is_none() && s.omega_hat < 0.0 {
            first_negative = Some(x);
        }
    }
    NormReport {
        eta_norm_sq: parseval / ell_sq,
        eta_norm_sq_truncated: acc.value() / ell_sq,
        eta0: table.eta0.abs() / ell_sq,
        omega_decay_constant: omega_decay,
        omega_first_negative: first_negative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellDefect {
    pub m: u64,
    pub p_sq: f64,
    /// |√(F_p² − G_p²) − √(p⁴ + 8πp²)|.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub max_defect: f64,
    pub max_defect_p_sq: f64,
    /// max over shells of defect/(ℓ|p| + log N/N).
    pub defect_constant: f64,
    /// ω̂_N(0) − N ∫Vf.
    pub omega0_defect: f64,
    /// g_N − 4.
    pub g_n_defect: f64,
    pub shells: Vec<ShellDefect>,
}

pub fn bogoliubov_defect(table: &CoefficientTable) -> Result<DefectReport> {
    let n = table.params.n as f64;
    let scale = n.ln() / n;
    let mut report = DefectReport {
        max_defect: 0.0,
        max_defect_p_sq: 0.0,
        defect_constant: 0.0,
        omega0_defect: table.omega_hat0 - n * table.int_vf,
        g_n_defect: table.g_n - 4.0,
        shells: Vec::with_capacity(table.shells.len()),
    };
    for s in &table.shells {
        let e = pair_frequency(s.f, s.g)?;
        let e0 = dispersion(s.p_sq, 1.0);
        // e² − e0² = 2p²(ω̂ − 4π)
        let defect = (2.0 * s.p_sq * (s.omega_hat - 4.0 * PI) / (e + e0)).abs();
        if defect > report.max_defect {
            report.max_defect = defect;
            report.max_defect_p_sq = s.p_sq;
        }
        let c = defect / (table.ell * s.p_sq.sqrt() + scale);
        report.defect_constant = report.defect_constant.max(c);
        report.shells.push(ShellDefect {
            m: s.m,
            p_sq: s.p_sq,
            defect,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityShell {
    pub m: u64,
    /// Largest |residual| over the lattice points of the shell.
    pub residual: f64,
    pub tail_bound: f64,
    /// Residual of the same identity with the convolutions evaluated as
    /// Fourier transforms of V f and χ f (no lattice truncation).
    pub untruncated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub q_cut: f64,
    pub p_max: f64,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Largest per-point truncation bound.
    pub tail_bound: f64,
    /// Every point satisfies |residual| ≤ its own truncation bound.
    pub within_tail_bound: bool,
    pub max_untruncated: f64,
    /// Constant C in |η_q| ≤ C/q² used for the tail.
    pub eta_decay_bound: f64,
    pub shells: Vec<IdentityShell>,
}

/// Lattice residual of the scattering equation for η,
///
/// ```text
///     p²η_p + (N/2)V̂(p/e^N) + ½ Σ_q V̂((p−q)/e^N) η_q
///           − ½ω̂_N(p) − (1/2N) Σ_q ω̂_N(p−q) η_q,
/// ```
///
/// with the sums over |q| ≤ p_max (q = 0 included), for every lattice point
/// 0 < |p| ≤ q_cut. The identity is exact, so the residual is the omitted
/// tail |q| > p_max plus quadrature error.
pub fn check_scattering_identity(table: &CoefficientTable, pot: &Potential, q_cut: f64) -> Result<IdentityReport> {
    let p_max = table.cutoff;
    if !(q_cut >= 2.0 * PI) || q_cut > 0.5 * p_max * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "q_cut = {q_cut} must lie in [2 pi, p_max/2] with p_max = {p_max}"
        )));
    }
    let n = table.params.n as f64;
    let k_scale = table.ell / table.radius;
    let mq = shell_index_max(p_max);
    let mp = shell_index_max(q_cut);

    let mut eta_by_m = vec![0.0; mq as usize + 1];
    eta_by_m[0] = table.eta0;
    for s in &table.shells {
        eta_by_m[s.m as usize] = s.eta;
    }
    let jq = (mq as f64).sqrt().floor() as i64;
    let mut qs = Vec::new();
    for j in -jq..=jq {
        for k in -jq..=jq {
            let m = (j * j + k * k) as u64;
            if m <= mq {
                qs.push((j, k, eta_by_m[m as usize]));
            }
        }
    }

    // ½V̂(·/e^N) − ω̂_N/(2N), tabulated by d = |p − q|²/(4π²)
    let d_max = ((mp as f64).sqrt() + (mq as f64).sqrt()).powi(2).ceil() as u64;
    let counts = shell_counts(d_max);
    let vhat_by_d = (0..=d_max)
        .into_par_iter()
        .map(|d| {
            if d > 0 && counts[d as usize] == 0 {
                return Ok(0.0);
            }
            pot.fourier_hat_fast(2.0 * PI * (d as f64).sqrt() * k_scale)
        })
        .collect::<Result<Vec<f64>>>()?;
    let omega_by_d: Vec<f64> = (0..=d_max)
        .map(|d| table.omega_hat_at(2.0 * PI * (d as f64).sqrt()))
        .collect();
    let kernel: Vec<f64> = vhat_by_d
        .iter()
        .zip(&omega_by_d)
        .map(|(v, w)| 0.5 * v - w / (2.0 * n))
        .collect();

    let jp = (mp as f64).sqrt().floor() as i64;
    let mut ps = Vec::new();
    for a in -jp..=jp {
        for b in -jp..=jp {
            let m = (a * a + b * b) as u64;
            if m > 0 && m <= mp {
                ps.push((a, b, m));
            }
        }
    }
    let eta_bound = n * table.int_vf;
    let residuals: Vec<(u64, f64)> = ps
        .par_iter()
        .map(|&(a, b, m)| {
            let mut acc = CompensatedSum::new();
            for &(j, k, eta) in &qs {
                let d = ((a - j) * (a - j) + (b - k) * (b - k)) as usize;
                acc.add(kernel[d] * eta);
            }
            let p_sq = 4.0 * PI * PI * m as f64;
            let local = p_sq * eta_by_m[m as usize] + 0.5 * n * vhat_by_d[m as usize] - 0.5 * omega_by_d[m as usize];
            (m, local + acc.value())
        })
        .collect();

    let mut shells: Vec<IdentityShell> = table
        .shells
        .iter()
        .filter(|s| s.m <= mp)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|s| {
            let p = s.p_sq.sqrt();
            let tail = truncation_tail(table, pot, p, p_max, eta_bound)?;
            Ok(IdentityShell {
                m: s.m,
                residual: 0.0,
                tail_bound: tail,
                untruncated: untruncated_residual(table, pot, p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for &(m, r) in &residuals {
        let i = shells.binary_search_by_key(&m, |s| s.m).expect("shell present");
        shells[i].residual = shells[i].residual.max(r.abs());
    }
    let max_residual = shells.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mean_residual = compensated_sum(residuals.iter().map(|r| r.1.abs())) / residuals.len() as f64;
    Ok(IdentityReport {
        q_cut,
        p_max,
        points: residuals.len(),
        max_residual,
        mean_residual,
        tail_bound: shells.iter().map(|s| s.tail_bound).fold(0.0, f64::max),
        within_tail_bound: shells.iter().all(|s| s.residual <= s.tail_bound),
        max_untruncated: shells.iter().map(|s| s.untruncated.abs()).fold(0.0, f64::max),
        eta_decay_bound: eta_bound,
        shells,
    })
}

/// N·[−k²ŵ(k) + ½(Vf)^(k) − λ f̂(k)] at k = |p|/e^N, where f̂ is the transform
/// of f restricted to the disk. Vanishes exactly for the true solution.
fn untruncated_residual(table: &CoefficientTable, pot: &Potential, p: f64) -> f64 {
    let k = table.scaled_momentum(p);
    let sol = &table.solution;
    let bracket = -k * k * sol.hankel_w(pot, k) + 0.5 * sol.hankel_vf(pot, k) - sol.lambda * sol.hankel_f(pot, k);
    2.0 * PI * table.params.n as f64 * bracket
}

/// Radial envelope of |V̂(k)|, nonincreasing in k.
fn vhat_envelope(pot: &Potential, v_int: f64, sqrt_moment: f64, k: f64) -> f64 {
    if k <= 0.0 {
        return v_int;
    }
    let decay = match pot.kind() {
        // v0 R0² |χ̂(kR0)| ≤ 2π v0 R0² · √(2/π)(kR0)^{−3/2}
        PotentialKind::SoftDisk => {
            let r0 = pot.range();
            2.0 * PI * pot.v0() * r0 * r0 * J1_ENVELOPE * (k * r0).powf(-1.5)
        }
        // |J₀(kr)| ≤ c (kr)^{−1/2}
        _ => 2.0 * PI * J0_ENVELOPE * sqrt_moment / k.sqrt(),
    };
    v_int.min(decay)
}

/// Bound on the omitted part of both convolutions at |p|, with
/// |η_q| ≤ C/q². A lattice sum Σ_{|q|>P} h(|q|) of a nonincreasing h is
/// dominated by (1/2π) ∫_{P−2π√2}^∞ h(s)(s + π√2) ds: each unit cell around
/// q lies within π√2 of q.
fn truncation_tail(table: &CoefficientTable, pot: &Potential, p: f64, p_max: f64, eta_bound: f64) -> Result<f64> {
    if eta_bound == 0.0 {
        return Ok(0.0);
    }
    let n = table.params.n as f64;
    let k_scale = table.ell / table.radius;
    let v_int = pot.fourier_hat_fast(0.0)?;
    let sqrt_moment = if pot.kind() == PotentialKind::SoftDisk {
        0.0
    } else {
        let mut lo = 0.0;
        let mut total = 0.0;
        for hi in pot.breakpoints() {
            total += adaptive(lo, hi, 1e-14 * v_int.max(1e-300), |r| pot.eval_unchecked(r) * r.sqrt())?;
            lo = hi;
        }
        total
    };
    let shift = PI * 2f64.sqrt();
    let s0 = p_max - 2.0 * shift;
    let h = |s: f64| {
        let gap = s - p;
        let v = vhat_envelope(pot, v_int, sqrt_moment, gap * k_scale);
        let x = table.ell * gap;
        let w = table.g_n.abs() * PI.min(2.0 * PI * J1_ENVELOPE * x.powf(-1.5));
        eta_bound / (s * s) * (0.5 * v + w / (2.0 * n))
    };
    // integrate in u = log s
    let u0 = s0.ln();
    let u1 = u0 + 120.0;
    let value = adaptive(u0, u1, 1e-12 * h(s0) * s0 * s0, |u| {
        let s = u.exp();
        h(s) * (s + shift) * s
    })?;
    Ok(value / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disk() -> Potential {
        Potential::soft_disk(2.0, 1.0).unwrap()
    }

    #[test]
    fn params_validation_and_scales() {
        let p = GPParams::new(10);
        p.validate().unwrap();
        assert_relative_eq!(p.ell(), 10f64.powf(-2.5), max_relative = 1e-15);
        assert_relative_eq!(p.radius(), 10f64.exp() * p.ell(), max_relative = 1e-12);
        assert_eq!(p.cutoff(), DEFAULT_P_MAX);
        assert!(GPParams::new(1).validate().is_err());
        assert!(GPParams { nu: 0.5, ..GPParams::new(10) }.validate().is_err());
        assert!(GPParams { alpha: 0.5, ..GPParams::new(10) }.validate().is_err());
        assert!(GPParams { alpha: 1.0, ..GPParams::new(2) }.validate().is_err());
        assert!(GPParams::new(10).with_p_max(1.0).validate().is_err());
    }

    #[test]
    fn radius_budget_is_enforced() {
        let mut p = GPParams::new(40);
        p.radius_budget = 1e9;
        assert!(matches!(build_table(&disk(), &p), Err(Error::RadiusTooLarge { .. })));
    }

    #[test]
    fn tau_upsilon_examples() {
        assert_eq!(tau_upsilon(1.0, 0.0).unwrap(), (0.0, 0.0));
        let (t, u) = tau_upsilon(2.0, 1.0).unwrap();
        assert_relative_eq!(t, 0.25 * (1.0f64 / 3.0).ln(), max_relative = 1e-14);
        assert!(((2.0 * u).tanh() - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!(((2.0 * t).tanh() + 0.5).abs() < 1e-12);
        assert!(tau_upsilon(1.0, 1.0).is_err());
    }

    #[test]
    fn table_identities_at_n10() {
        let t = build_table(&disk(), &GPParams::new(10)).unwrap();
        assert_eq!(t.omega_hat0, PI * t.g_n);
        assert_relative_eq!(t.g_n, 2.0 * 10.0 * t.lambda * t.radius * t.radius, max_relative = 1e-14);
        // χ̂_ℓ(0) = πℓ²
        assert_relative_eq!(t.ell * t.ell * disk_hat(0.0), PI * t.ell * t.ell, max_relative = 1e-15);
        let b = lemma_bounds(&t);
        assert_eq!(b.lower_violations + b.gap_violations + b.sign_violations, 0);
        assert!(b.tau_defect < 1e-12 && b.upsilon_defect < 1e-12);
        assert!(b.eta_decay_constant <= b.eta_decay_bound);
        // g_N = 2N ε² ≈ (4N/L)(1 + 3/(4L)), L = log(R/𝔞)
        let l = t.solution.log_ratio().unwrap();
        assert_relative_eq!(t.g_n, 40.0 / l * (1.0 + 0.75 / l), max_relative = 2.0 / (l * l));
        // radial: the value at an arbitrary vector of the shell norm agrees
        let s = t.shell(25).unwrap();
        assert_relative_eq!(t.eta_at((4.0 * PI * PI * (9.0 + 16.0)).sqrt()), s.eta, max_relative = 1e-10);
    }

    #[test]
    fn zero_potential_gives_a_trivial_table() {
        let v = Potential::soft_disk(0.0, 1.0).unwrap();
        let t = build_table(&v, &GPParams::new(8)).unwrap();
        assert_eq!(t.g_n, 0.0);
        assert_eq!(t.eta0, 0.0);
        for s in &t.shells {
            assert_eq!((s.eta, s.omega_hat, s.g, s.tau, s.upsilon), (0.0, 0.0, 0.0, 0.0, 0.0));
            assert_eq!(s.f, s.p_sq);
        }
        let r = check_scattering_identity(&t, &v, 8.0 * PI).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let norms = norm_checks(&t);
        assert_eq!((norms.eta_norm_sq, norms.eta0, norms.omega_decay_constant), (0.0, 0.0, 0.0));
    }

    #[test]
    fn identity_residual_is_below_the_tail_bound() {
        let v = disk();
        let t = build_table(&v, &GPParams::new(8)).unwrap();
        let r = check_scattering_identity(&t, &v, 8.0 * PI).unwrap();
        assert!(r.within_tail_bound, "{r:?}");
        assert!(r.max_untruncated < 1e-6 * t.params.n as f64, "{}", r.max_untruncated);
        assert!(check_scattering_identity(&t, &v, t.cutoff).is_err());
    }

    #[test]
    fn parseval_norm_dominates_the_truncated_sum() {
        let t = build_table(&disk(), &GPParams::new(8)).unwrap();
        let n = norm_checks(&t);
        assert!(n.eta_norm_sq_truncated <= n.eta_norm_sq * (1.0 + 1e-9));
        assert!(n.eta_norm_sq.is_finite() && n.eta0.is_finite());
    }

    #[test]
    fn defect_vanishes_when_omega_is_four_pi() {
        let mut t = build_table(&disk(), &GPParams::new(8)).unwrap();
        let s = &mut t.shells[0];
        s.omega_hat = 4.0 * PI;
        s.g = 4.0 * PI;
        s.f = s.p_sq + 4.0 * PI;
        let d = bogoliubov_defect(&t).unwrap();
        assert_eq!(d.shells[0].defect, 0.0);
    }
}
