//! Scalar abstraction for field evaluation.
//!
//! Everything a Lagrangian or force definition needs from its number type.
//! `f32`, `f64` and [`crate::dual::Dual<S>`] over any scalar implement it, so
//! the same field definition serves plain evaluation and (nested) forward-mode
//! differentiation.

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};

pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lifts an `f64` constant into the scalar (zero derivative parts).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Value with all derivative parts dropped, as `f64`.
    fn real(self) -> f64;
}

impl Scalar for f64 {
    fn real(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn real(self) -> f64 {
        self as f64
    }
}
