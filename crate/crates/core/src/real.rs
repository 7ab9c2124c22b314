use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar bound used throughout the crate. Implemented for `f32` and `f64`.
///
/// Default tolerances are tuned for `f64`; `f32` works on shallow grids
/// (the lattice underflows single precision after roughly 100 halvings).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Sum + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Width of the window used to decide that a value sits on an integer.
    fn int_window() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(16.0))
    }

    /// Returns the nearest integer when `self` is within [`Real::int_window`] of it.
    fn as_integer(self) -> Option<i64> {
        let r = self.round();
        if (self - r).abs() < Self::int_window() {
            r.to_i64()
        } else {
            None
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
