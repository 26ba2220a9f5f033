//! Envy-free allocation of indivisible goods with transfer payments, in exact
//! arithmetic.
//!
//! The core is generic over [`Scalar`]: exact [`Rational`] and [`Surd`]
//! (sums of rational multiples of square roots) plus `f64`/`f32` with a
//! comparison tolerance.

pub mod algorithms;
pub mod cli;
pub mod envy;
pub mod error;
pub mod matching;
pub mod model;
pub mod oracles;
pub mod scalar;
pub mod surd;

pub use error::{Error, Result};
pub use scalar::{ExactScalar, Rational, Scalar};
pub use surd::Surd;

pub type RationalInstance = model::Instance<Rational>;
pub type SurdInstance = model::Instance<Surd>;
pub type FloatInstance = model::Instance<f64>;
