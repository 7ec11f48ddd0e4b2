//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + Display + LowerExp + Debug + Send + Sync
{
    /// Converts a literal; every `f64` constant used by the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
