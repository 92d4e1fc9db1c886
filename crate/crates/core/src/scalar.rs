use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used by the geometric and algebraic core.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant representable")
    }

    /// Relative tolerance used for tie-breaking and tangency checks.
    fn tie_tol() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn tie_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn tie_tol() -> Self {
        2e-5
    }
}
