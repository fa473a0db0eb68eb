// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod energy;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod hausdorff;
pub mod localq;
pub mod lorentz;
pub mod regularity;
pub mod sum;

pub use error::{Error, Result};
