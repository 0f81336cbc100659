//! Scalar abstraction: the numeric core is generic over the floating type.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Widening view used by the special-function backend.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Conversion from a sample or grid size.
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    /// Comparison slack for mass/weight normalization checks. `1e-12` in
    /// double precision, loosened for narrower types where that is not
    /// representable headroom.
    fn mass_tolerance() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(128.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
