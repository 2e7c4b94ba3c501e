//! Floating point abstraction shared by every numerical module.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, NumAssign};
use rustfft::FftNum;

/// Real scalar type usable by the simulator (`f32` or `f64`).
///
/// The FFT backend dictates `FftNum`; everything else is ordinary float
/// arithmetic. Round-off level tolerances quoted in the docs and tests assume
/// `f64`.
pub trait Real:
    Float
    + FloatConst
    + FftNum
    + NumAssign
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + fmt::Display
    + fmt::LowerExp
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("usize representable")
    }

    /// Widening conversion used for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <f64 as num_traits::NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FftNum
        + NumAssign
        + Default
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + fmt::Display
        + fmt::LowerExp
{
}
