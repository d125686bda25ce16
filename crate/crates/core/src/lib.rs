//! Numerical laboratory for the Selberg integral distribution, lognormal
//! multiplicative chaos, and mesoscopic statistics of Riemann zeroes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod error;
pub mod mellin;
pub mod quad;
pub mod specfun;
pub mod selberg;
pub mod stats;
mod sum;
pub mod zeros;

pub use error::{Error, Result};
