//! q-Euler numbers and polynomials of higher order, Barnes-type q-Euler
//! numbers, their p-adic integral representations and the associated
//! q-zeta functions.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chars;
pub mod error;
pub mod fixed;
pub mod padic;
pub mod powerseries;
pub mod qcore;
pub mod qeuler;
mod summation;
pub mod tolerances;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
