//! Floating-point abstraction for the numerical core.
//!
//! Everything in this crate is generic over [`Real`], which is implemented
//! for `f32` and `f64`. The stated accuracy targets (1e-8 .. 1e-13) are only
//! meaningful at `f64`; the `f32` instantiation exists for cheap scans.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type the library is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert any primitive number into the working scalar type.
///
/// Panics only if the value is not representable at all (never the case for
/// the constants this crate uses).
#[inline]
pub fn real<T: Real, U: ToPrimitive>(v: U) -> T {
    T::from(v).expect("numeric constant not representable in scalar type")
}
