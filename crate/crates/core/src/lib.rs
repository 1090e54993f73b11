// `!(x >= y)` style guards are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebyshev;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod model;
pub mod one_particle;
pub mod simulator;
pub mod spectrum;
pub mod spin;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
