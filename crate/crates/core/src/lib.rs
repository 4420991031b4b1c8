//! Mirror benchmarking toolkit.
//!
//! Generates mirrored random Clifford circuits, simulates them under
//! configurable noise (a stabilizer Monte-Carlo backend and an exact dense
//! superoperator backend), and fits the survival-probability decay
//! `p(L) = A u^(L-1) + 1/2^n` whose rate is the unitarity of the per-layer
//! error channel. The [`channels`] module carries the exact Pauli transfer
//! matrix algebra used as an oracle for the whole pipeline.

pub mod analysis;
pub mod channels;
pub mod circuits;
pub mod dense;
mod error;
pub mod operators;
pub mod plot;
pub mod simulator;

pub use error::{Error, Result};
