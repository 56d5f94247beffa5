//! Exact and certified tooling for operational no-signalling in spacetime.
//!
//! The crate decides causal and operational-separation relations between
//! spacetime events, generates and checks the no-signalling constraints a
//! correlation box must satisfy in a given layout, turns violations into
//! explicit signalling protocols, certifies the n-party jamming geometry and
//! computes monogamy values of XOR games.
//!
//! Probabilities and coordinates are exact rationals throughout. The linear
//! programming core is generic over [`Scalar`], so the same simplex runs over
//! [`Rational`] (exact, the default) or `f64` for quick exploration.

pub mod boxes;
pub mod case_studies;
pub mod causal_geometry;
pub mod interval;
pub mod jamming;
pub mod layouts;
pub mod lp;
pub mod monogamy;
pub mod ons;
pub mod protocol;
pub mod rational;
pub mod scalar;

pub use lp::{ExactLp, FloatLp, LinearProgram};
pub use scalar::Scalar;

/// Exact rational scalar used for coordinates and probabilities.
pub type Rational = num_rational::BigRational;
