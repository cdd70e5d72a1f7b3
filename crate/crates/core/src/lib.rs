//! Quilted Gabor frames on the finite signal space `C^L`.

pub mod constructions;
pub mod error;
pub mod gabor;
pub mod linalg;
pub mod quilt;
pub mod reconstruct;
pub mod signal;

pub use error::{QuiltError, Result};
pub use gabor::{FrameBounds, GaborFrame, Lattice};
pub use quilt::{FrameAssignment, Partition, QuiltedSystem, Region};
pub use signal::{Signal, TFPoint};
