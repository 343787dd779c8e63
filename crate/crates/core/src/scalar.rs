//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Default comparison tolerance for contexts built over this scalar.
    fn default_tol() -> Self;

    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `i·x` for real `x`.
#[inline]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}

/// True when `x` lies within `tol` of an integer.
#[inline]
pub(crate) fn near_integer<T: Real>(x: T, tol: T) -> bool {
    (x - x.round()).abs() <= tol
}
