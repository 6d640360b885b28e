//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the simulator is generic over.
///
/// Implemented for `f32` and `f64`. The tolerance hooks let each width pick
/// thresholds that make sense for its precision; the `f64` values are the
/// documented defaults.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance for the "triggering function equals zero" test.
    fn trigger_eq_tol() -> Self;

    /// Off-diagonal tolerance for the symmetric eigen-solver, relative to
    /// the Frobenius norm of the input.
    fn eigen_tol() -> Self;

    /// Default absolute tolerance for the weight-balance check.
    fn balance_tol() -> Self;

    /// Converts an `f64` literal. Panics only if the value is not
    /// representable, which never happens for finite literals.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize fits in a float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn trigger_eq_tol() -> Self {
        1e-12
    }
    fn eigen_tol() -> Self {
        1e-12
    }
    fn balance_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn trigger_eq_tol() -> Self {
        1e-5
    }
    fn eigen_tol() -> Self {
        1e-6
    }
    fn balance_tol() -> Self {
        1e-5
    }
}
