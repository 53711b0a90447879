//! Functional-data clustering of facial-landmark exercise recordings.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cluster;
pub mod curve;
pub mod error;
pub mod eval;
pub mod fpca;
pub mod ingest;
pub mod synth;

pub use error::{Error, Result};
