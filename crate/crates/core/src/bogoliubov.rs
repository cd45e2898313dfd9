//! Closed-form diagonalization of pair Hamiltonians
//!
//! ```text
//!     H = F (a*_p a_p + a*_{-p} a_{-p}) + G (a*_p a*_{-p} + a_p a_{-p}),   |G| < F,
//! ```
//!
//! one term per unordered momentum pair {p, −p}. Completing the square gives
//! H = e (c*_p c_p + c*_{-p} c_{-p}) + (e − F) with e = √(F² − G²). A sum
//! over all lattice points p (both p and −p) therefore counts each pair's
//! frequency twice but its shift only once.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModePair<T> {
    pub label: String,
    pub f: T,
    pub g: T,
}

impl<T: Scalar> ModePair<T> {
    pub fn new(label: impl Into<String>, f: T, g: T) -> Result<Self> {
        check_pair(f, g)?;
        Ok(Self { label: label.into(), f, g })
    }
}

/// Collection of independent pairs. Zero modes (|G| = F) are rejected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticModel<T> {
    pub pairs: Vec<ModePair<T>>,
}

impl<T: Scalar> QuadraticModel<T> {
    pub fn new(pairs: Vec<ModePair<T>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::domain("a quadratic model needs at least one pair"));
        }
        for p in &pairs {
            check_pair(p.f, p.g)?;
        }
        Ok(Self { pairs })
    }

    /// Builds a model from bare (F, G) values labelled by position.
    pub fn from_fg(values: &[(T, T)]) -> Result<Self> {
        let pairs = values
            .iter()
            .enumerate()
            .map(|(i, &(f, g))| ModePair::new(format!("pair{i}"), f, g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalForm<T> {
    /// e = √(F² − G²) per pair (each pair carries two modes of this energy).
    pub frequencies: Vec<T>,
    /// e − F per pair.
    pub pair_shifts: Vec<T>,
    /// Ground-state energy: Σ_pairs (e − F).
    pub shift: T,
    /// (cosh τ, sinh τ) per pair.
    pub cosh_sinh: Vec<(T, T)>,
}

/// c_p = (a_p + α a*_{−p})/√(1 − α²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpCoefficients<T> {
    pub alpha: T,
    /// 1/√(1 − α²).
    pub normalization: T,
    pub frequency: T,
}

fn check_pair<T: Scalar>(f: T, g: T) -> Result<()> {
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::domain("F and G must be finite"));
    }
    if !(f > T::zero()) || !(g.abs() < f) {
        return Err(Error::domain(format!("need F > 0 and |G| < F, got F = {f:?}, G = {g:?}")));
    }
    Ok(())
}

/// e = √(F − G)·√(F + G).
pub fn pair_frequency<T: Scalar>(f: T, g: T) -> Result<T> {
    check_pair(f, g)?;
    if g == T::zero() {
        return Ok(f);
    }
    Ok((f - g).sqrt() * (f + g).sqrt())
}

pub fn diagonalize<T: Scalar>(model: &QuadraticModel<T>) -> Result<DiagonalForm<T>> {
    let n = model.pairs.len();
    let mut frequencies = Vec::with_capacity(n);
    let mut pair_shifts = Vec::with_capacity(n);
    let mut cosh_sinh = Vec::with_capacity(n);
    let half = T::lit(0.5);
    for p in &model.pairs {
        let e = pair_frequency(p.f, p.g)?;
        // cosh² = (F/e + 1)/2 = (F + e)/(2e), sinh² = (F/e − 1)/2 = G²/(2e(F + e))
        let c = (half * (p.f + e) / e).sqrt();
        let s = p.g.abs() / (T::lit(2.0) * e * (p.f + e)).sqrt();
        let s = if p.g > T::zero() { -s } else { s };
        frequencies.push(e);
        // e − F = −G²/(F + e), free of cancellation
        pair_shifts.push(-(p.g * p.g) / (p.f + e));
        cosh_sinh.push((c, s));
    }
    let mut acc = crate::summation::CompensatedSum::<T>::new();
    for &s in &pair_shifts {
        acc.add(s);
    }
    Ok(DiagonalForm {
        frequencies,
        pair_shifts,
        shift: acc.value(),
        cosh_sinh,
    })
}

pub fn cp_coefficients<T: Scalar>(f: T, g: T) -> Result<CpCoefficients<T>> {
    let e = pair_frequency(f, g)?;
    // α = (F − e)/G = G/(F + e)
    let alpha = g / (f + e);
    let normalization = T::one() / ((T::one() - alpha) * (T::one() + alpha)).sqrt();
    Ok(CpCoefficients {
        alpha,
        normalization,
        frequency: e,
    })
}

/// Inverse of [`cp_coefficients`]: F = e(1 + α²)/(1 − α²), G = 2eα/(1 − α²).
pub fn reconstruct<T: Scalar>(frequency: T, alpha: T) -> Result<(T, T)> {
    if !(frequency > T::zero()) || !(alpha.abs() < T::one()) {
        return Err(Error::domain("need e > 0 and |α| < 1"));
    }
    let d = (T::one() - alpha) * (T::one() + alpha);
    let two = T::lit(2.0);
    Ok((frequency * (T::one() + alpha * alpha) / d, two * frequency * alpha / d))
}

/// ε^{(R)}(p) = √(p⁴ + 8πR p²) as a function of p².
pub fn dispersion<T: Scalar>(p_sq: T, coupling: T) -> T {
    if p_sq == T::zero() {
        return T::zero();
    }
    let c = T::lit(8.0) * T::PI() * coupling;
    p_sq.sqrt() * (p_sq + c).sqrt()
}
