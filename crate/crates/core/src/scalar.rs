//! Floating-point scalar abstraction shared by every generic module.

use std::fmt::LowerExp;
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the solver is generic over: `f32` or `f64`.
///
/// Everything assembled by the crate (tensors, sparse operators, factorizations)
/// is parameterized by this trait. Randomized audits and the manufactured-solution
/// machinery work in `f64` only.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + FromStr + LowerExp {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance of `base`, widened to 64 ulps for types where `base` is
    /// below working precision.
    fn tol(base: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let base = Self::lit(base);
        if base > floor {
            base
        } else {
            floor
        }
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_depends_on_precision() {
        assert_eq!(f64::tol(1e-10), 1e-10);
        assert!(f32::tol(1e-10) > 1e-6);
        assert_eq!(f32::lit(0.5), 0.5f32);
    }
}
