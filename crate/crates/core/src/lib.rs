//! Polynomials on bubble-diamond fractals.
//!
//! The crate builds the graph approximations `G_l`, computes the coefficient
//! sequences behind the multiharmonic and monomial bases in exact rational
//! arithmetic, samples polynomials on vertices by cell refinement, and runs
//! Gram-Schmidt to produce Legendre-type orthogonal polynomials together with
//! their three-term recursion data.

pub mod calculus;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod orthopoly;
pub mod polyspace;
pub mod scalar;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
