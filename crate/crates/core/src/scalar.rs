//! Scalar abstraction: every numerical module is generic over [`Real`].
//!
//! `f32` is supported for experimentation; production runs and all shipped
//! tolerances assume `f64`.

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar usable throughout the solver stack.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + NumAssignOps
    + FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::iter::Sum
{
    /// Lift an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Lift a `usize` (counts, dof numbers) into the scalar type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Round-trip to `f64` for I/O and reporting.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Real>::lit(0.25), 0.25);
        assert_eq!(<f32 as Real>::lit(0.25), 0.25f32);
        assert_eq!(<f64 as Real>::of_usize(77), 77.0);
    }
}
