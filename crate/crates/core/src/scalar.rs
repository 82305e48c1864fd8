//! Scalar abstractions.
//!
//! [`Scalar`] covers everything the linear constraint algebra needs (checks of
//! (R1)-(R12), coefficient conversions, degree elevation) and is implemented
//! for `f32`, `f64` and exact [`BigRational`]. [`Real`] adds the
//! transcendental functions required by density evaluation.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance used for exact linear identities.
    fn linear_tolerance() -> Self;

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("integer fits in scalar")
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize_exact(num) / Self::from_usize_exact(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn linear_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn linear_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for BigRational {
    fn linear_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Floating-point scalar used by density, exponent and quadrature code.
pub trait Real: Scalar + Float + Copy {
    fn c(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    /// Tolerance for quantities obtained through quadrature.
    fn quadrature_tolerance() -> Self;
}

impl Real for f64 {
    fn quadrature_tolerance() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn quadrature_tolerance() -> Self {
        1e-4
    }
}
