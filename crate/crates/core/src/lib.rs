//! Custom-precision arithmetic laboratory.
//!
//! Bit-accurate fixed-point ([`fxp`]) and reduced-precision floating-point
//! ([`flp`]) number systems, fixed-point format inference over expression
//! graphs ([`graph`]), word-length optimization ([`wlopt`]) and two benchmark
//! kernels ([`kernels`]) used to compare the number systems at equal width.

pub mod arith;
pub mod conformance;
pub mod flp;
pub mod fxp;
pub mod graph;
pub mod interval;
pub mod kernels;
pub mod rational;
mod wide;
pub mod wlopt;

/// Exact rational used for oracles, ranges and reference values.
pub type Rational = num_rational::BigRational;
