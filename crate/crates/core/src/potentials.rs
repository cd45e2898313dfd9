//! Radial, repulsive, compactly supported two-body potentials and their
//! zero-energy scattering data.
//!
//! The scattering length 𝔞 is defined through the zero-energy problem
//! −Δφ + ½Vφ = 0, whose solution outside the support of V is c·log(r/𝔞).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::quadrature;
use crate::special::{i1_over_i0, j0, j1};

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant. Preserves
/// monotonicity on every interval, hence stays within the data range and
/// keeps a nonnegative table nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::domain("monotone cubic needs at least two (x, y) pairs of equal length"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("abscissae must be strictly increasing"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = end_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        slopes[n - 1] = if n > 2 {
            end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3])
        } else {
            delta[0]
        };
        Ok(Self { x, y, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Evaluates inside [x₀, x_last]; clamps outside.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if sign(m) != sign(d0) {
        0.0
    } else if sign(d0) != sign(d1) && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// v0 on the closed disk of radius R0.
    SoftDisk,
    /// v0·exp(−4r²/R0²) for r ≤ R0.
    GaussianTruncated,
    /// Monotone cubic through tabulated (r, V) samples; R0 is the last r.
    Tabulated(MonotoneCubic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    SoftDisk,
    GaussianTruncated,
    TabulatedRadial,
}

/// A radial potential V(r) ≥ 0 vanishing for r > R0.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    profile: Profile,
    v0: f64,
    r0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringMethod {
    ClosedForm,
    ZeroEnergyOde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringData {
    pub a: f64,
    pub method: ScatteringMethod,
}

impl Potential {
    pub fn soft_disk(v0: f64, r0: f64) -> Result<Self> {
        Self::check_params(v0, r0)?;
        Ok(Self {
            profile: Profile::SoftDisk,
            v0,
            r0,
        })
    }

    pub fn gaussian_truncated(v0: f64, r0: f64) -> Result<Self> {
        Self::check_params(v0, r0)?;
        Ok(Self {
            profile: Profile::GaussianTruncated,
            v0,
            r0,
        })
    }

    /// Tabulated profile through strictly increasing radii with V ≥ 0. The
    /// range R0 is the last radius; the first radius must be 0.
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.first() != Some(&0.0) {
            return Err(Error::domain("tabulated profile must start at r = 0"));
        }
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::domain("tabulated potential values must be finite and nonnegative"));
        }
        let interp = MonotoneCubic::new(r, v)?;
        let r0 = *interp.knots().last().unwrap();
        let v0 = interp.values().iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            profile: Profile::Tabulated(interp),
            v0,
            r0,
        })
    }

    /// Reads a two-column CSV (r, V(r)); a non-numeric first row is treated
    /// as a header.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::domain(format!("row {}: expected two columns, found {}", i + 1, rec.len())));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(r), Ok(v)) => {
                    rs.push(r);
                    vs.push(v);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::domain(format!("row {}: non-numeric entry", i + 1))),
            }
        }
        Self::tabulated(rs, vs)
    }

    fn check_params(v0: f64, r0: f64) -> Result<()> {
        if !(v0.is_finite() && v0 >= 0.0) {
            return Err(Error::domain(format!("strength v0 must be finite and nonnegative, got {v0}")));
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::domain(format!("range R0 must be positive, got {r0}")));
        }
        Ok(())
    }

    pub fn kind(&self) -> PotentialKind {
        match self.profile {
            Profile::SoftDisk => PotentialKind::SoftDisk,
            Profile::GaussianTruncated => PotentialKind::GaussianTruncated,
            Profile::Tabulated(_) => PotentialKind::TabulatedRadial,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn range(&self) -> f64 {
        self.r0
    }

    /// V ≡ 0.
    pub fn is_zero(&self) -> bool {
        match &self.profile {
            Profile::Tabulated(t) => t.values().iter().all(|&v| v == 0.0),
            _ => self.v0 == 0.0,
        }
    }

    /// V(r); zero for r > R0. Negative radii are a domain error.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        if r > self.r0 {
            return 0.0;
        }
        match &self.profile {
            Profile::SoftDisk => self.v0,
            Profile::GaussianTruncated => {
                let s = r / self.r0;
                self.v0 * (-4.0 * s * s).exp()
            }
            Profile::Tabulated(t) => t.eval(r),
        }
    }

    /// Radii in (0, R0] where V or its derivatives may jump; integrators
    /// stop on each of them.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Tabulated(t) => t.knots().iter().copied().filter(|&r| r > 0.0).collect(),
            _ => vec![self.r0],
        }
    }

    /// Radial 2D Fourier transform V̂(k) = 2π ∫₀^{R0} V(r) J₀(kr) r dr,
    /// computed by adaptive Gauss–Legendre quadrature on each smooth piece.
    pub fn fourier_hat(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0) {
            return Err(Error::domain(format!("momentum must be nonnegative, got {k}")));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let scale = self.v0 * self.r0 * self.r0;
        let mut lo = 0.0;
        let mut total = 0.0;
        for hi in self.breakpoints() {
            let piece = quadrature::adaptive(lo, hi, 1e-14 * scale, |r| self.eval_unchecked(r) * j0(k * r) * r)?;
            total += piece;
            lo = hi;
        }
        Ok(2.0 * PI * total)
    }

    /// Closed-form V̂(k) when one exists (soft disk: v0·2πR0·J₁(kR0)/k).
    pub fn fourier_hat_closed_form(&self, k: f64) -> Option<f64> {
        match self.profile {
            Profile::SoftDisk => Some(self.v0 * self.r0 * self.r0 * crate::special::disk_hat(k * self.r0)),
            _ => None,
        }
    }

    /// V̂(k) by the closed form when available, quadrature otherwise.
    pub fn fourier_hat_fast(&self, k: f64) -> Result<f64> {
        match self.fourier_hat_closed_form(k) {
            Some(v) => Ok(v),
            None => self.fourier_hat(k),
        }
    }

    /// Scattering length; closed form for soft disks, zero-energy ODE
    /// otherwise.
    pub fn scattering_length(&self) -> Result<ScatteringData> {
        match self.profile {
            Profile::SoftDisk => self.scattering_length_closed_form(),
            _ => self.scattering_length_ode(),
        }
    }

    /// Soft disk: matching I₀(κr) inside to log(r/𝔞) outside gives
    /// 𝔞 = R0·exp(−I₀(κR0)/(κR0·I₁(κR0))), κ = √(v0/2).
    pub fn scattering_length_closed_form(&self) -> Result<ScatteringData> {
        if !matches!(self.profile, Profile::SoftDisk) {
            return Err(Error::domain("closed-form scattering length exists only for the soft disk"));
        }
        if self.is_zero() {
            return Err(Error::domain("V ≡ 0 has vanishing scattering length"));
        }
        let x = (self.v0 / 2.0).sqrt() * self.r0;
        let a = self.r0 * (-1.0 / (x * i1_over_i0(x))).exp();
        Ok(ScatteringData {
            a,
            method: ScatteringMethod::ClosedForm,
        })
    }

    /// Integrates the zero-energy equation in t = log r as a Riccati equation
    /// for u = φ_t/φ together with log φ, then fits φ = c·log(r/𝔞) at
    /// r₁ = 2R0 and r₂ = 4R0.
    pub fn scattering_length_ode(&self) -> Result<ScatteringData> {
        if self.is_zero() {
            return Err(Error::domain("V ≡ 0 has vanishing scattering length"));
        }
        let ode = Dopri5 {
            rtol: 1e-13,
            atol: 1e-16,
            max_steps: 2_000_000,
        };
        let r0 = self.r0;
        let r_start = 1e-8 * r0;
        let v_origin = self.eval_unchecked(0.0);
        // φ = 1 + V(0) r²/8 + …  ⇒  u = r φ_r/φ ≈ V(0) r²/4, log φ ≈ V(0) r²/8
        let mut y = [v_origin * r_start * r_start / 4.0, v_origin * r_start * r_start / 8.0];
        let mut t = r_start.ln();
        let mut h = 1e-3;
        let stops = self.breakpoints();
        for &stop in &stops {
            let t1 = stop.ln();
            let (y1, h1) = ode.integrate(
                |t, y: &[f64; 2]| {
                    let r = t.exp();
                    let v = self.eval_unchecked(r.min(stop));
                    [0.5 * r * r * v - y[0] * y[0], y[0]]
                },
                t,
                y,
                t1,
                h,
            )?;
            y = y1;
            t = t1;
            h = h1;
        }
        // Free region: u_t = −u², (log φ)_t = u.
        let free = |_: f64, y: &[f64; 2]| [-y[0] * y[0], y[0]];
        let (t1, t2) = ((2.0 * r0).ln(), (4.0 * r0).ln());
        let (y1, h1) = ode.integrate(free, t, y, t1, h)?;
        let (y2, _) = ode.integrate(free, t1, y1, t2, h1)?;
        let rho = (y2[1] - y1[1]).exp();
        let log_a = (rho * t1 - t2) / (rho - 1.0);
        let defect = (y2[0] * (t2 - log_a) - 1.0).abs();
        if !(defect < 1e-6) || !log_a.is_finite() {
            return Err(Error::FitFailure { defect });
        }
        Ok(ScatteringData {
            a: log_a.exp(),
            method: ScatteringMethod::ZeroEnergyOde,
        })
    }

    /// Relative defect between ∫_{B_R}[|∇φ|² + ½V|φ|²] for the zero-energy
    /// minimizer (normalized φ(R) = 1) and 2π/log(R/𝔞). The functional is
    /// evaluated by composite Simpson quadrature of the profile sampled on a
    /// radial grid, so the defect measures quadrature error only.
    pub fn variational_check(&self, a: f64, radius: f64) -> Result<f64> {
        if !(radius > self.r0) {
            return Err(Error::domain(format!("R = {radius} must exceed the range R0 = {}", self.r0)));
        }
        if !(a > 0.0) {
            return Err(Error::domain("scattering length must be positive"));
        }
        let n_inner = 256usize;
        let decades = (radius / self.r0).log10();
        let n_outer = (((64.0 * decades).ceil() as usize).max(8) + 1) & !1;
        let (r_in, phi_in, dphi_in) = self.zero_energy_profile_uniform(n_inner)?;
        let mut inner = Vec::with_capacity(n_inner + 1);
        for i in 0..=n_inner {
            let r = r_in[i];
            let v = if i == n_inner {
                self.eval_unchecked(self.r0)
            } else {
                self.eval_unchecked(r)
            };
            inner.push(2.0 * PI * r * (dphi_in[i] * dphi_in[i] + 0.5 * v * phi_in[i] * phi_in[i]));
        }
        let h = self.r0 / n_inner as f64;
        let inner_integral = simpson(&inner, h);
        // Outside R0 the minimizer is φ(R0) + R0 φ'(R0) log(r/R0): φ_t is
        // constant, sampled on a uniform grid in t = log r.
        let phi_r0 = phi_in[n_inner];
        let slope = self.r0 * dphi_in[n_inner];
        let ht = (radius / self.r0).ln() / n_outer as f64;
        let outer: Vec<f64> = (0..=n_outer).map(|_| 2.0 * PI * slope * slope).collect();
        let outer_integral = simpson(&outer, ht);
        let phi_big_r = phi_r0 + slope * (radius / self.r0).ln();
        let functional = (inner_integral + outer_integral) / (phi_big_r * phi_big_r);
        let target = 2.0 * PI / (radius / a).ln();
        Ok(((functional - target) / target).abs())
    }

    /// Zero-energy solution φ (φ(0) = 1) and φ' on a uniform grid of
    /// `n` intervals over [0, R0].
    fn zero_energy_profile_uniform(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let ode = Dopri5 {
            rtol: 1e-13,
            atol: 1e-300,
            max_steps: 2_000_000,
        };
        let h = self.r0 / n as f64;
        let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let mut phi = vec![1.0; n + 1];
        let mut dphi = vec![0.0; n + 1];
        let v_origin = self.eval_unchecked(0.0);
        let r_start = 1e-6 * h;
        let mut t = r_start.ln();
        let mut y = [1.0 + v_origin * r_start * r_start / 8.0, v_origin * r_start * r_start / 4.0];
        let mut step = 1e-2;
        for i in 1..=n {
            let t1 = r[i].ln();
            let hi = r[i];
            let (y1, s) = ode.integrate(
                |t, y: &[f64; 2]| {
                    let rr = t.exp().min(hi);
                    [y[1], 0.5 * rr * rr * self.eval_unchecked(rr) * y[0]]
                },
                t,
                y,
                t1,
                step,
            )?;
            y = y1;
            t = t1;
            step = s;
            phi[i] = y[0];
            dphi[i] = y[1] / r[i];
        }
        Ok((r, phi, dphi))
    }

    /// Radial sample of V on `n` points of [0, 1.25·R0], for reports.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let r = 1.25 * self.r0 * i as f64 / (n.max(2) - 1) as f64;
                (r, self.eval_unchecked(r))
            })
            .collect()
    }

    /// J₁-based check value V̂ for soft disks at k > 0, used in tests.
    pub fn soft_disk_hat_reference(v0: f64, r0: f64, k: f64) -> f64 {
        if k == 0.0 {
            v0 * PI * r0 * r0
        } else {
            v0 * 2.0 * PI * r0 * j1(k * r0) / k
        }
    }
}

/// Composite Simpson rule on equally spaced samples (even interval count).
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n.is_multiple_of(2) && n >= 2);
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.profile {
            Profile::SoftDisk => write!(f, "soft-disk:v0={},r0={}", self.v0, self.r0),
            Profile::GaussianTruncated => write!(f, "gaussian:v0={},r0={}", self.v0, self.r0),
            Profile::Tabulated(t) => write!(f, "table[{} knots]:r0={}", t.knots().len(), self.r0),
        }
    }
}

/// Parses `soft-disk:v0=2,r0=1`, `gaussian:v0=1,r0=1` or `table:<path.csv>`.
impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind = kind.trim().to_ascii_lowercase();
        if kind == "table" || kind == "tabulated" || kind == "tabulated-radial" {
            return Self::from_csv_path(rest.trim());
        }
        let mut v0 = None;
        let mut r0 = None;
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("potential parameter '{part}' is not key=value")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("potential parameter '{part}' is not a number")))?;
            match key.trim().to_ascii_lowercase().as_str() {
                "v0" => v0 = Some(val),
                "r0" => r0 = Some(val),
                other => return Err(Error::Config(format!("unknown potential parameter '{other}'"))),
            }
        }
        let v0 = v0.ok_or_else(|| Error::Config("potential needs v0".into()))?;
        let r0 = r0.unwrap_or(1.0);
        match kind.as_str() {
            "soft-disk" | "softdisk" | "disk" => Self::soft_disk(v0, r0),
            "gaussian" | "gaussian-truncated" => Self::gaussian_truncated(v0, r0),
            other => Err(Error::Config(format!("unknown potential kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_examples() {
        let v = Potential::soft_disk(2.0, 1.0).unwrap();
        assert_eq!(v.eval(0.5).unwrap(), 2.0);
        assert_eq!(v.eval(1.5).unwrap(), 0.0);
        let g = Potential::gaussian_truncated(1.0, 1.0).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 1.0);
        assert_eq!(g.eval(1.0 + 1e-12).unwrap(), 0.0);
        assert!(v.eval(-1.0).is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Potential::soft_disk(-1.0, 1.0).is_err());
        assert!(Potential::soft_disk(1.0, 0.0).is_err());
        assert!(Potential::tabulated(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]).is_err());
        assert!(Potential::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]).is_err());
        assert!(Potential::tabulated(vec![0.5, 1.0], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn fourier_hat_origin_is_area_integral() {
        let v = Potential::soft_disk(3.0, 1.5).unwrap();
        assert_relative_eq!(v.fourier_hat(0.0).unwrap(), 3.0 * PI * 2.25, max_relative = 1e-13);
    }

    #[test]
    fn fourier_hat_decays() {
        let v = Potential::gaussian_truncated(1.0, 1.0).unwrap();
        let small = v.fourier_hat(2000.0).unwrap().abs();
        assert!(small < 1e-4 * v.fourier_hat(0.0).unwrap());
    }

    #[test]
    fn soft_disk_scattering_length_value() {
        // I0(1)/I1(1) = 2.2401..., 𝔞 = exp(−2.2401...)
        let a = Potential::soft_disk(2.0, 1.0).unwrap().scattering_length().unwrap().a;
        assert_relative_eq!(a, 0.10643788282328882, max_relative = 1e-13);
    }

    #[test]
    fn hard_disk_limit() {
        let a = Potential::soft_disk(1e8, 1.0).unwrap().scattering_length().unwrap().a;
        assert!((a - 1.0).abs() < 1e-3, "a = {a}");
        assert!(a < 1.0);
    }

    #[test]
    fn ode_agrees_with_closed_form_for_soft_disk() {
        let v = Potential::soft_disk(2.0, 1.0).unwrap();
        let a1 = v.scattering_length_closed_form().unwrap().a;
        let a2 = v.scattering_length_ode().unwrap().a;
        assert_relative_eq!(a1, a2, max_relative = 1e-8);
    }

    #[test]
    fn zero_potential_has_no_scattering_length() {
        let v = Potential::soft_disk(0.0, 1.0).unwrap();
        assert!(v.scattering_length().is_err());
        assert!(v.scattering_length_ode().is_err());
        assert_eq!(v.fourier_hat(1.0).unwrap(), 0.0);
    }

    #[test]
    fn variational_defect_small_and_decreasing() {
        let v = Potential::soft_disk(2.0, 1.0).unwrap();
        let a = v.scattering_length().unwrap().a;
        let d3 = v.variational_check(a, 1e3).unwrap();
        let d6 = v.variational_check(a, 1e6).unwrap();
        assert!(d3 < 1e-4, "defect {d3}");
        assert!(d6 < d3, "{d6} !< {d3}");
    }

    #[test]
    fn monotone_cubic_preserves_nonnegativity() {
        let x = vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let y = vec![5.0, 5.0, 0.0, 0.0, 3.0, 0.0];
        let m = MonotoneCubic::new(x, y).unwrap();
        for i in 0..=1000 {
            let v = m.eval(i as f64 / 1000.0);
            assert!((0.0..=5.0 + 1e-12).contains(&v), "{v}");
        }
    }

    #[test]
    fn csv_with_header_round_trips_through_parser() {
        let data = "r,V\n0,2\n0.5,2\n1.0,2\n";
        let v = Potential::from_csv_reader(data.as_bytes()).unwrap();
        assert_eq!(v.kind(), PotentialKind::TabulatedRadial);
        assert_eq!(v.range(), 1.0);
        assert_relative_eq!(v.eval(0.3).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn parses_spec_strings() {
        let v: Potential = "soft-disk:v0=2,r0=1".parse().unwrap();
        assert_eq!(v, Potential::soft_disk(2.0, 1.0).unwrap());
        let g: Potential = "gaussian:v0=1,R0=2".parse().unwrap();
        assert_eq!(g.kind(), PotentialKind::GaussianTruncated);
        assert!("soft-disk:v0=2,w=1".parse::<Potential>().is_err());
        assert!("cube:v0=2".parse::<Potential>().is_err());
    }
}
