use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: invalid input (`Domain`, `Config`,
/// `Io`) and numerical failures, where a computed quantity violated an
/// invariant the mathematics guarantees.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("no sign change of f'(R) in lambda window [{lo:e}, {hi:e}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("eigenfunction has an interior zero near r = {r:e}; not the ground state")]
    InteriorZero { r: f64 },

    #[error("exterior zero-energy solution is not logarithmic (defect {defect:e})")]
    FitFailure { defect: f64 },

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("ode integration failed at t = {t:e}: {reason}")]
    Ode { t: f64, reason: String },

    #[error("radius e^N l = {radius:e} exceeds the solver budget {budget:e}")]
    RadiusTooLarge { radius: f64, budget: f64 },

    #[error("coefficient bound violated at |p|^2 = {p_sq:e}: {what}")]
    BoundViolation { p_sq: f64, what: String },

    #[error("tail bound {tail:e} exceeds requested tolerance {tol:e}; increase the cutoff")]
    TailTooLarge { tail: f64, tol: f64 },

    #[error("dimension budget exceeded: {nonzeros} nonzeros > {budget}")]
    DimensionBudget { nonzeros: usize, budget: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

impl Error {
    /// True for errors caused by the caller's input rather than by a failed
    /// numerical invariant.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Io(_))
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
