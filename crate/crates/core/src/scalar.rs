//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the pipeline can run on: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding when the target is narrower.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Draws from `N(0, sigma²)`.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R, sigma: Self) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R, sigma: Self) -> Self {
                let z: $t = StandardNormal.sample(rng);
                z * sigma
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;
