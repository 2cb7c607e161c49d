//! Adaptive confidence balls over self-similar Sobolev sequences.
//!
//! The crate works in the Gaussian sequence model `y_k = f_k + g_k / sqrt(n)`.
//! A sample is split in two, a Lepski-type rule picks a resolution level from
//! the first half, and an unbiased risk estimate built from the second half
//! sets the radius. The [`lowerbound`] module contains the adversarial and
//! minimax families showing that the self-similarity condition cannot be
//! dropped, and [`harness`] runs the Monte Carlo experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod concentration;
mod error;
pub mod harness;
pub mod lepski;
pub mod lowerbound;
pub mod model;
mod numeric;
pub mod par;
pub mod selfsim;
pub mod sequences;

pub use error::{Error, Result};
pub use sequences::CoeffSeq;
