//! Scalar abstraction for the simulation core.
//!
//! All device and array math is generic over [`Real`], so the same code runs
//! in `f32` or `f64`. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the simulation core.
pub trait Real:
    Float + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossless-enough conversion from a literal constant.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_roundtrip() {
        assert_eq!(f64::c(0.5), 0.5);
        assert_eq!(f32::c(0.5), 0.5f32);
    }
}
