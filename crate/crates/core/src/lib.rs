//! Symmetrization and symmetry of ground states on discretized domains.
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energy;
pub mod error;
pub(crate) mod fft;
pub mod grid;
pub mod group;
pub mod minimizer;
pub mod random;
pub mod symmetrize;
pub mod verify;

pub use error::{Error, Result};
