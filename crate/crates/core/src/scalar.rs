//! Scalar abstractions.
//!
//! Exact arithmetic is generic over a signed integer type so the same code
//! runs on machine words (fast BFS at desk scale) and on `BigInt` (long
//! words, where entries grow like `p^ℓ`). Floating point code is generic
//! over `num_traits::Float`.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

/// A signed integer usable as the component type of a Gaussian integer.
///
/// Arithmetic on fixed-width types goes through the checked operations and
/// panics on overflow instead of wrapping.
pub trait Int:
    num_integer::Integer
    + Signed
    + Clone
    + Hash
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    fn of_i64(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("integer conversion")
    }

    /// Lossless conversion to `BigInt`.
    fn to_big(&self) -> BigInt;

    /// Conversion from `BigInt`, `None` when the value does not fit.
    fn from_big(v: &BigInt) -> Option<Self>;
}

impl Int for i64 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i64()
    }
}

impl Int for i128 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
}

impl Int for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
}

#[inline]
pub(crate) fn add<T: Int>(a: &T, b: &T) -> T {
    a.checked_add(b).expect("integer overflow in addition")
}

#[inline]
pub(crate) fn sub<T: Int>(a: &T, b: &T) -> T {
    a.checked_sub(b).expect("integer overflow in subtraction")
}

#[inline]
pub(crate) fn mul<T: Int>(a: &T, b: &T) -> T {
    a.checked_mul(b).expect("integer overflow in multiplication")
}

/// Converts between integer scalar types, panicking if the value does not fit.
pub fn convert<A: Int, B: Int>(a: &A) -> B {
    B::from_big(&a.to_big()).expect("value does not fit in target integer type")
}

/// Floating point scalar for the PU(3) embedding.
pub trait Real: num_traits::Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}
