//! Scalar abstraction for the closed-form parts of the library.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal, panicking only if the target type cannot
    /// represent finite values at all (never for `f32`/`f64`).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Relative tolerance appropriate for identities evaluated in this type.
    fn identity_tol() -> Self;
}

impl Scalar for f32 {
    fn identity_tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn identity_tol() -> Self {
        1e-12
    }
}
