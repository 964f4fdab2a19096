//! Rational points, local solvability and CM classification on Atkin-Lehner
//! quotients of geometrically hyperelliptic Shimura curves `X_0(D,N)`.
//!
//! Curve equations and expected results live in the JSON catalog; this crate
//! only implements the arithmetic that checks them.

pub mod arith;
pub mod atkin_lehner;
pub mod catalog;
pub mod cm;
pub mod curve;
pub mod error;
pub mod local;
pub mod pipeline;
pub mod points;
pub mod poly;
pub mod quad_orders;

pub use error::{Error, Result};
