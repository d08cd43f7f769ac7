//! Simulation and analysis of qubit-coupled mechanical cat states.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod catfit;
pub mod error;
pub mod dynamics;
pub mod hilbert;
pub mod optim;
pub mod phase_space;
pub mod pipeline;
pub mod output;
pub mod special;
pub mod tomography;

pub use error::{Error, Result};
