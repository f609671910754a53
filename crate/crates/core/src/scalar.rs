//! Scalar abstraction shared by the analytic layer.
//!
//! Exact solutions, forcing terms and quadrature rules are written once
//! against [`Scalar`] and evaluated either with plain floats or with
//! (nested) dual numbers to obtain derivatives.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{Float, Num};

/// Real-like number type: `f32`, `f64`, or a dual number over one of them.
pub trait Scalar: Copy + Debug + PartialOrd + Num + Neg<Output = Self> {
    fn from_f64(v: f64) -> Self;

    /// Primal value, stripping all derivative parts.
    fn re(self) -> f64;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn re(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            #[inline]
            fn exp(self) -> Self {
                Float::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                Float::ln(self)
            }
            #[inline]
            fn powf(self, e: f64) -> Self {
                Float::powf(self, e as $t)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                Float::powi(self, n)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);
