//! Finite volume construction of entropy solutions to scalar conservation
//! laws `∂_t u + div_ω f(u) = 0` on manifolds carrying a bounded volume form,
//! with checks for the properties such solutions must satisfy.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod boundary;
pub mod error;
pub mod flux;
pub mod fv;
pub mod geometry;

pub use error::{Error, Result};
