//! Numerics for Bogoliubov theory of the two-dimensional Bose gas in the
//! Gross–Pitaevskii regime.
//!
//! The crate is organized bottom-up:
//!
//! * [`potentials`]: radial interactions and their scattering lengths;
//! * [`scattering`]: the Neumann ground state f_R on a disk of radius R;
//! * [`coefficients`]: renormalized coefficients η_p, ω̂_N(p), F_p, G_p on
//!   the momentum lattice;
//! * [`lattice`]: regularized sums over 2πℤ²∖{0}, ground-state energy
//!   formulas and the excitation ladder;
//! * [`bogoliubov`]: closed-form diagonalization of pair Hamiltonians;
//! * [`fock`]: exact diagonalization of the same Hamiltonians on truncated
//!   Fock spaces, as an oracle for [`bogoliubov`];
//! * [`verify`]: aggregated consistency suites.
//!
//! Closed-form algebra is generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64`, which is what every solver uses.

// `!(x > 0.0)` style guards are intentional: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod coefficients;
pub mod error;
pub mod fock;
pub mod lanczos;
pub mod lattice;
pub mod ode;
pub mod potentials;
pub mod quadrature;
pub mod scalar;
pub mod scattering;
pub mod special;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CompensatedSum = summation::CompensatedSum<f64>;
pub type QuadraticModel = bogoliubov::QuadraticModel<f64>;
pub type ModePair = bogoliubov::ModePair<f64>;
pub type DiagonalForm = bogoliubov::DiagonalForm<f64>;
pub type CpCoefficients = bogoliubov::CpCoefficients<f64>;

pub use bogoliubov::{cp_coefficients, diagonalize, dispersion, pair_frequency, reconstruct};
pub use coefficients::{build_table, CoefficientTable, GPParams, ShellCoefficients};
pub use fock::{build as build_fock, compare_analytic, gp_slice_check, lowest_eigs, FockBasis, SparseHamiltonian};
pub use lanczos::{EigenMethod, LanczosOptions};
pub use lattice::{energy_en, energy_enr, spectrum_enumerate, LatticeSumResult, SpectrumLevel, SumStrategy};
pub use verify::{run_suite, Suite, VerifyReport};

pub use potentials::{Potential, ScatteringData};
pub use scattering::{solve_neumann, NeumannOptions, ScatteringSolution};
