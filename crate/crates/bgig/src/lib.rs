// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod distributions;
pub mod error;
pub mod process;
pub mod pricing;
pub mod quad;
pub mod risk_neutral;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
