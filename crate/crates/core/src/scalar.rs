//! Numeric element traits shared by every module.
//!
//! Tensor contraction only needs ring arithmetic, so [`Element`] is satisfied
//! by exact integer types as well as floats. Everything that takes square
//! roots, compares against tolerances or solves linear systems is bounded on
//! [`Scalar`] instead.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, Num};

/// A tensor entry: anything with `+ - * /`, zero and one.
pub trait Element: Num + Copy + Debug + Send + Sync + 'static {
    /// `false` for NaN and infinities; always `true` for exact types.
    fn is_finite_value(&self) -> bool;
}

macro_rules! float_element {
    ($($t:ty),*) => {$(
        impl Element for $t {
            #[inline]
            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }
        }
    )*};
}

macro_rules! exact_element {
    ($($t:ty),*) => {$(
        impl Element for $t {
            #[inline]
            fn is_finite_value(&self) -> bool {
                true
            }
        }
    )*};
}

float_element!(f32, f64);
exact_element!(i32, i64, i128);

/// Floating point scalar used by the game, complementarity and solver layers.
pub trait Scalar: Element + Float + FromPrimitive + Display + LowerExp {}

impl<T> Scalar for T where T: Element + Float + FromPrimitive + Display + LowerExp {}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn dot<T: Element>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}
