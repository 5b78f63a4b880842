//! Scalar abstraction shared by the numeric kernels (simulation, metrics,
//! evolution strategy).
//!
//! Angles and circuit parameters are always stored as `f64`; the kernels are
//! generic over [`Real`] and convert at their boundary with [`Real::lit`].

use core::fmt::{Debug, Display};
use core::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};

/// Real floating-point scalar usable by every numeric kernel in the crate.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or parameter value into this scalar.
    fn lit(x: f64) -> Self;

    /// Widens to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64;

    /// Machine epsilon scaled tolerance helpers use.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Complex amplitude over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}
