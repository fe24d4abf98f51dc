//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the planner can run on: `f32` or `f64`.
///
/// Everything in this crate is written against this trait; the concrete
/// aliases at the crate root pick `f64`.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance used for symmetry, PSD and cost comparisons.
    const TOL: f64;
    /// Distances below this are treated as zero travel.
    const TINY: f64;
}

impl Scalar for f64 {
    const TOL: f64 = 1e-9;
    const TINY: f64 = 1e-12;
}

impl Scalar for f32 {
    const TOL: f64 = 1e-4;
    const TINY: f64 = 1e-6;
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a scalar back to `f64` (lossless for `f32` and `f64`).
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Numerical tolerances, defaulting to the scalar type's `TOL`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Max absolute asymmetry accepted for a covariance.
    pub sym: T,
    /// Smallest eigenvalue `>= -psd` counts as PSD.
    pub psd: T,
    /// Slack for cost comparisons.
    pub cost: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            sym: lit(T::TOL),
            psd: lit(T::TOL),
            cost: lit(T::TOL),
        }
    }
}
