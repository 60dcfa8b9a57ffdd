//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the solvers are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal. Every `f64` literal is representable in both
    /// implementors (possibly rounded for `f32`), so this never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_index(i: usize) -> Self {
        Self::from_usize(i).expect("index representable")
    }

    /// Euler-Mascheroni constant.
    #[inline]
    fn euler_gamma() -> Self {
        Self::lit(0.577_215_664_901_532_9)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}
