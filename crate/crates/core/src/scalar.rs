use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the distance computations are generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Converts a count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as a float")
    }

    fn from_signed(n: i64) -> Self {
        Self::from_i64(n).expect("count representable as a float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable as a float")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
