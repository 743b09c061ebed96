//! Capacity-achieving inputs of amplitude-constrained Gaussian channels:
//! densities and information densities, closed-form support-size bounds,
//! zero counting, and a KKT-verified optimizer.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod format;
pub mod quadrature;
pub mod solver;
pub mod specfun;
pub mod zeros;

pub use error::{Error, Result};
