//! Detecting regions of constant coupling in spatially embedded Gaussian Markov
//! random fields, with the sample-complexity bounds that go with it.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod gaussian;
pub mod geometry;
pub mod graphgen;
pub mod gred;
pub mod harness;
pub mod linalg;

pub use error::{Error, Result};
