//! Experiment runner and verification suite for quilted Gabor frames.
//!
//! The built-in presets reproduce the reference experiments (quilted
//! lattice export, condition-number and iteration tables, diagonal
//! preconditioning, atom replacement); `run` executes a JSON-configured
//! experiment and `verify` runs the invariant suite.

pub mod config;
pub mod experiments;
pub mod verify;
