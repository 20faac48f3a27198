//! Floating-point abstraction shared by the model, dynamics and statistics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the simulator is generic over (`f32` or `f64`).
///
/// Random draws are produced in `f64` and narrowed through [`Scalar::of`], so
/// an `f32` run consumes exactly the same random stream as an `f64` run.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant or draw into this scalar type.
    fn of(x: f64) -> Self;

    fn as_f64(self) -> f64;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline(always)]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline(always)]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Converts a count into a scalar.
#[inline]
pub(crate) fn count<T: Scalar>(n: usize) -> T {
    T::of(n as f64)
}
