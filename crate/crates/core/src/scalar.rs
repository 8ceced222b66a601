//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar usable by the decompositions in this crate.
///
/// The tolerance hooks let `f32` and `f64` instantiations share code while
/// keeping thresholds meaningful for each precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Off-diagonal orthogonality threshold for the Jacobi SVD sweeps.
    fn svd_tol() -> Self;

    /// Relative gap under which two objective values count as tied.
    fn tie_tol() -> Self;

    /// Relative magnitude under which a residual matrix is treated as zero.
    fn zero_tol() -> Self;

    /// Tolerance for detecting singular values equal to one.
    fn unit_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn svd_tol() -> Self {
        1e-12
    }
    fn tie_tol() -> Self {
        1e-11
    }
    fn zero_tol() -> Self {
        1e-12
    }
    fn unit_tol() -> Self {
        1e-8
    }
}

impl Scalar for f32 {
    fn svd_tol() -> Self {
        1e-6
    }
    fn tie_tol() -> Self {
        1e-5
    }
    fn zero_tol() -> Self {
        1e-5
    }
    fn unit_tol() -> Self {
        1e-4
    }
}

/// Sign with the convention `sign(0) = +1`.
#[inline]
pub fn sign<T: Scalar>(x: T) -> i8 {
    if x < T::zero() {
        -1
    } else {
        1
    }
}

#[inline]
pub(crate) fn signed<T: Scalar>(s: i8) -> T {
    if s < 0 {
        -T::one()
    } else {
        T::one()
    }
}
