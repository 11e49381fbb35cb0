//! Equilibria of cross-holding financial networks with failure costs,
//! computed through higher-order binary optimization.
//!
//! The pipeline runs [`network`] → [`equilibrium`] → [`hubo`] →
//! [`reduction`] → [`solver`]; [`cli`] strings the stages together.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod hubo;
pub mod network;
mod numfmt;
pub mod qubo;
pub mod reduction;
pub mod solver;

pub use error::{Error, Result};
pub use numfmt::g17;
