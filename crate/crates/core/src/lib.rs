//! Numerical extremal functions of open sets in C^n via disc functionals.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discs;
pub mod domains;
pub mod envelopes;
pub mod error;
pub mod functionals;
pub mod optimize;
pub mod oracles;
pub mod poly;
pub mod primitives;

pub use error::{Error, Result};
pub use num_complex::Complex64;
