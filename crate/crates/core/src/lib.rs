#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod eigen;
pub mod error;
pub mod reduction;
pub mod sweep;
pub mod torus;
pub mod validate;
pub mod wave;

pub use error::{Error, Result};
