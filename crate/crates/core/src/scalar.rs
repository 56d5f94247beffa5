//! The ordered-field abstraction the linear-programming code is generic over.
//!
//! Exact rationals make every pivot decision exact; `f64` is supported for
//! quick exploratory solves and compares against a small tolerance.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed};

use crate::Rational;

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + FromPrimitive {
    /// Whether the value should be treated as zero by pivoting rules.
    fn is_negligible(&self) -> bool;

    /// True when arithmetic on this type is exact.
    const EXACT: bool;

    fn to_f64_lossy(&self) -> f64;

    fn is_positive_strict(&self) -> bool {
        !self.is_negligible() && self.is_positive()
    }

    fn is_negative_strict(&self) -> bool {
        !self.is_negligible() && self.is_negative()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn is_negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }

    fn to_f64_lossy(&self) -> f64 {
        crate::rational::to_f64(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-10
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-5
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}
